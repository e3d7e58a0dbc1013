#pragma once

#include <cstdint>
#include <filesystem>

#include "braindec/types.hpp"

namespace braindec {

enum class Dtype : std::uint8_t { F32 = 1, F64 = 2 };

// Dense numeric matrix backing brain features, latents and decoder weights.
// Storage is always f64; the dtype tag records the on-disk element type so
// that a write after a read reproduces the file bit for bit.
struct FeatureMatrix {
  Matrix data;
  Dtype dtype = Dtype::F64;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

// FMAT container: "FMAT" magic, version byte 0x01, dtype byte (1=f32, 2=f64),
// rows and cols as 64-bit little-endian unsigned, then the row-major
// little-endian payload.
void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path);

inline void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_matrix(FeatureMatrix{m, Dtype::F64}, path);
}

/// Inverse of write_matrix. Rejects unknown magic/version/dtype, truncated
/// payloads and non-finite entries. f32 payloads are widened to f64.
FeatureMatrix read_matrix(const std::filesystem::path& path);

/// Convenience: read and discard the dtype tag.
Matrix read_matrix_f64(const std::filesystem::path& path);

}  // namespace braindec
