#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "braindec/errors.hpp"
#include "braindec/matrix_io.hpp"
#include "braindec/rng.hpp"

using namespace braindec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "braindec_test_io";
  fs::create_directories(dir);
  return dir / name;
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

}  // namespace

TEST_CASE("header layout for a 1x1 f64 matrix") {
  const fs::path path = temp_file("one.fmat");
  Matrix m(1, 1);
  m << 0.0;
  write_matrix(m, path);

  // 4 magic + 1 version + 1 dtype + 8 rows + 8 cols + 8 payload
  CHECK(fs::file_size(path) == 30);

  std::ifstream in(path, std::ios::binary);
  char head[6];
  in.read(head, 6);
  CHECK(std::string(head, 4) == "FMAT");
  CHECK(head[4] == 0x01);
  CHECK(head[5] == 0x02);  // f64

  const FeatureMatrix back = read_matrix(path);
  CHECK(back.rows() == 1);
  CHECK(back.cols() == 1);
  CHECK(back.data(0, 0) == 0.0);
}

TEST_CASE("2x3 f32 zeros: 22-byte header + 24 zero payload bytes") {
  const fs::path path = temp_file("zeros32.fmat");
  write_matrix(FeatureMatrix{Matrix::Zero(2, 3), Dtype::F32}, path);
  CHECK(fs::file_size(path) == 22 + 24);

  std::ifstream in(path, std::ios::binary);
  in.seekg(22);
  for (int i = 0; i < 24; ++i) CHECK(in.get() == 0);
}

TEST_CASE("round trip is bitwise for both dtypes across random shapes") {
  Rng shapes(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto rows = static_cast<Index>(1 + shapes.next_below(9));
    const auto cols = static_cast<Index>(1 + shapes.next_below(9));
    for (const Dtype dtype : {Dtype::F64, Dtype::F32}) {
      Matrix m = random_matrix(rows, cols, 1000 + static_cast<std::uint64_t>(rep));
      if (dtype == Dtype::F32) m = m.cast<float>().cast<double>();  // float-representable values
      const fs::path path = temp_file("roundtrip.fmat");
      write_matrix(FeatureMatrix{m, dtype}, path);
      const FeatureMatrix back = read_matrix(path);
      CHECK(back.dtype == dtype);
      REQUIRE(back.rows() == rows);
      REQUIRE(back.cols() == cols);
      CHECK((back.data.array() == m.array()).all());
    }
  }
}

TEST_CASE("5x7 round trip reproduces the payload bytes") {
  const fs::path a = temp_file("payload_a.fmat");
  const fs::path b = temp_file("payload_b.fmat");
  const Matrix m = random_matrix(5, 7, 99);
  write_matrix(m, a);
  write_matrix(read_matrix(a).data, b);

  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("bad magic is rejected") {
  const fs::path path = temp_file("bad_magic.fmat");
  write_matrix(Matrix::Zero(1, 1), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XMAT", 4);
  }
  CHECK_THROWS_AS(read_matrix(path), ValidationError);
}

TEST_CASE("declared 2x2 with 3 payload values is a length error") {
  const fs::path good = temp_file("full.fmat");
  write_matrix(Matrix::Ones(2, 2), good);
  const fs::path bad = temp_file("short.fmat");
  {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() - 8);  // drop one f64 value
    std::ofstream out(bad, std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(read_matrix(bad), ValidationError);
}

TEST_CASE("unknown version and dtype are rejected") {
  const fs::path path = temp_file("version.fmat");
  write_matrix(Matrix::Zero(1, 1), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    f.put(0x02);
  }
  CHECK_THROWS_AS(read_matrix(path), ValidationError);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    f.put(0x01);
    f.put(0x07);
  }
  CHECK_THROWS_AS(read_matrix(path), ValidationError);
}

TEST_CASE("non-finite payload entries are rejected") {
  const fs::path path = temp_file("nan.fmat");
  write_matrix(Matrix::Zero(1, 2), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(22);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.write(reinterpret_cast<const char*>(&nan), 8);
  }
  CHECK_THROWS_AS(read_matrix(path), ValidationError);
}

TEST_CASE("missing file raises an I/O error") {
  CHECK_THROWS_AS(read_matrix(temp_file("does_not_exist.fmat")), IoError);
}
