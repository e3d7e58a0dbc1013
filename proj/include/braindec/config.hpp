#pragma once

#include <cstdint>
#include <filesystem>

#include "braindec/fugw.hpp"
#include "braindec/preprocess.hpp"
#include "braindec/retrieval.hpp"

namespace braindec {

// Resolved run configuration. Defaults mirror the shipped alignment and
// decoding parameters: alpha 0.5, rho 1, epsilon 1e-4, 10 x 1000 iterations,
// ridge penalty 50000, FIR lag 2 / window 2 averaged.
struct RunConfig {
  FugwConfig fugw;
  double alpha_ridge = 50000.0;
  FirSpec fir;
  RetrievalConfig retrieval;
  double tr_seconds = 2.0;
  int detrend_order = 0;  // 0 = auto: ceil(2 n TR / 128 s)
  std::uint64_t seed = 0;

  int detrend_order_for(Index run_rows) const;
  int minutes_to_frames(double minutes) const;
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);
void validate_run_config(const RunConfig& config);

}  // namespace braindec
