#include "braindec/matrix_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "braindec/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "FMAT I/O assumes a little-endian host");

namespace braindec {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'T'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 8 + 8;

void put_u64(std::ostream& out, std::uint64_t value) {
  char buf[8];
  std::memcpy(buf, &value, 8);
  out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  std::uint64_t value = 0;
  std::memcpy(&value, buf, 8);
  return value;
}

}  // namespace

void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write error: cannot open " + path.string());

  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(m.dtype));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));

  if (m.dtype == Dtype::F64) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor payload = m.data;
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(payload.size())));
  } else if (m.dtype == Dtype::F32) {
    using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajorF payload = m.data.cast<float>();
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(payload.size())));
  } else {
    throw ValidationError("write error: unknown dtype tag");
  }

  if (!out.good()) throw IoError("write error: " + path.string());
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("read error: cannot open " + path.string());
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  if (file_size < kHeaderBytes) throw ValidationError("length error: truncated header in " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ValidationError("format error: bad magic in " + path.string());

  const int version = in.get();
  if (version != kVersion) throw ValidationError("format error: unsupported version in " + path.string());

  const int dtype_byte = in.get();
  if (dtype_byte != static_cast<int>(Dtype::F32) && dtype_byte != static_cast<int>(Dtype::F64)) {
    throw ValidationError("format error: unknown dtype in " + path.string());
  }
  const auto dtype = static_cast<Dtype>(dtype_byte);

  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  constexpr std::uint64_t kMaxDim = 1ULL << 32;
  if (rows >= kMaxDim || cols >= kMaxDim) {
    throw ValidationError("length error: implausible shape in " + path.string());
  }

  const std::uint64_t count = rows * cols;
  const std::uint64_t elem_size = dtype == Dtype::F64 ? 8 : 4;
  if (file_size != kHeaderBytes + count * elem_size) {
    throw ValidationError("length error: payload size mismatch in " + path.string());
  }

  FeatureMatrix m;
  m.dtype = dtype;
  if (dtype == Dtype::F64) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor payload(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * 8));
    if (!in.good() && count > 0) throw ValidationError("length error: short read in " + path.string());
    m.data = payload;
  } else {
    using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajorF payload(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * 4));
    if (!in.good() && count > 0) throw ValidationError("length error: short read in " + path.string());
    m.data = payload.cast<double>();
  }

  if (!m.data.allFinite()) throw ValidationError("validation error: non-finite entry in " + path.string());
  return m;
}

Matrix read_matrix_f64(const std::filesystem::path& path) { return read_matrix(path).data; }

}  // namespace braindec
