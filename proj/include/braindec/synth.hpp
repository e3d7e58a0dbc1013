#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "braindec/geometry.hpp"
#include "braindec/types.hpp"

namespace braindec {

enum class PermutationKind { Identity, Rotation180, Random };

PermutationKind parse_permutation_kind(const std::string& name);
std::string permutation_kind_name(PermutationKind kind);

struct SynthSubjectSpec {
  std::string id;
  PermutationKind permutation = PermutationKind::Identity;
};

// Multi-subject dataset with a known forward model: shared latents drive a
// spatially smooth reference response; each subject sees a vertex-permuted
// copy plus per-run noise at a fixed per-voxel signal-to-noise power ratio.
struct SynthSpec {
  GridShape grid{8, 8, 1.0};
  int n_train = 400;
  int n_test = 520;
  int latent_dim = 16;
  double smoothness = 2.0;  // length scale of the forward map, distance units
  double snr = 1.0;
  std::vector<SynthSubjectSpec> subjects;
  int train_repetitions = 1;
  int test_repetitions = 1;
  std::uint64_t seed = 0;
  int response_lag = 0;          // volumes between stimulus and response onset
  int response_span = 1;         // volumes the response spreads over, decaying
  double drift_amplitude = 0.0;  // optional low-order cosine drift per run
};

struct SynthSubjectData {
  std::string id;
  PermutationKind kind = PermutationKind::Identity;
  std::vector<int> perm;  // subject column i carries clean reference column perm[i]
  std::vector<Matrix> train_runs;
  std::vector<Matrix> test_runs;
};

struct SynthDataset {
  SynthSpec spec;
  Geometry geometry;  // shared grid
  Matrix latents_train;
  Matrix latents_test;
  Matrix clean_train;  // noise-free un-permuted responses
  Matrix clean_test;
  std::vector<SynthSubjectData> subjects;

  const SynthSubjectData& subject(const std::string& id) const;
};

SynthDataset generate(const SynthSpec& spec);

/// Ground-truth correspondence for a plan aligning `out` onto `ref`:
/// out vertex i should land on ref vertex truth[i].
std::vector<int> truth_correspondence(const std::vector<int>& perm_out, const std::vector<int>& perm_ref);

struct AlignQuality {
  double argmax_accuracy = 0.0;
  double mass_on_truth = 0.0;
};

/// Fraction of rows whose argmax (ties to the lowest index) hits the truth,
/// and the fraction of total mass sitting on the truth correspondence.
AlignQuality oracle_align_quality(const Matrix& plan, const std::vector<int>& truth);

/// Writes the dataset as a manifest.json + FMAT tree plus a
/// ground_truth.json sidecar with the per-subject permutations.
void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir);

SynthSpec load_synth_spec(const std::filesystem::path& path);

}  // namespace braindec
