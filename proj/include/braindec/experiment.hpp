#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "braindec/config.hpp"
#include "braindec/decoder.hpp"
#include "braindec/manifest.hpp"
#include "braindec/retrieval.hpp"

namespace braindec {

struct AlignmentSpec {
  enum class Kind { None, Functional };
  Kind kind = Kind::None;
  std::string reference;
  double minutes = -1.0;  // < 0: use all alignment data
};

enum class TrainRepetitionMode { Stack, Average, First };

TrainRepetitionMode parse_train_repetition_mode(const std::string& name);
std::string train_repetition_mode_name(TrainRepetitionMode mode);

struct TestRepetitionSpec {
  bool stack = false;      // stack runs showing the same stimuli
  int average_count = 1;   // otherwise average the first `average_count` runs
};

struct ExperimentSetup {
  std::vector<std::string> train_subjects;
  std::string test_subject;
  AlignmentSpec alignment;
  double train_minutes = -1.0;  // < 0: use all training data
  TrainRepetitionMode train_repetitions = TrainRepetitionMode::Stack;
  TestRepetitionSpec test_repetitions;
  std::string latent_type;  // empty: first latent type in the manifest
  FirSpec fir;
};

ExperimentSetup load_setup(const std::filesystem::path& path);

// In-memory dataset: feature runs, latents and geometries loaded once so
// sweeps do not reread files per cell.
struct LoadedRun {
  std::string id;
  Matrix features;
};

struct LoadedSubject {
  std::string id;
  Geometry geom;
  std::vector<LoadedRun> train_runs;
  std::vector<LoadedRun> test_runs;
};

struct LoadedDataset {
  std::vector<LoadedSubject> subjects;
  std::map<std::string, std::map<std::string, Matrix>> latents;  // type -> run id -> matrix
  std::vector<std::vector<std::string>> repetition_groups;

  const LoadedSubject& subject(const std::string& id) const;
  const Matrix& latent(const std::string& type, const std::string& run_id) const;
  std::string first_latent_type() const;
};

LoadedDataset load_dataset(const DatasetManifest& manifest);
LoadedDataset dataset_from_synth(const struct SynthDataset& synth);

struct SetupResult {
  ExperimentSetup setup;
  RetrievalReport report;
  Index train_rows = 0;
  Index test_rows = 0;
  int alignment_frames = 0;
  DecoderModel model;
};

/// Full pipeline: preprocess -> optional alignment + transport -> FIR ->
/// stack -> ridge -> predict on the test subject -> retrieval metrics.
SetupResult run_setup(const ExperimentSetup& setup, const LoadedDataset& dataset, const RunConfig& config);
SetupResult run_setup(const ExperimentSetup& setup, const DatasetManifest& manifest, const RunConfig& config);

struct SweepCell {
  double axis_value = 0.0;
  ExperimentSetup setup;
  std::optional<SetupResult> result;
  std::optional<std::string> error;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepCell> cells;
  double spearman_mr = 0.0;  // rank correlation of MR against the axis
};

/// Rank correlation with average ranks on ties.
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

/// One run_setup per grid value, alignment fitted on the first `minutes` of
/// alignment data only.
SweepResult sweep_alignment_data(const ExperimentSetup& base, const std::vector<double>& minutes_grid,
                                 const LoadedDataset& dataset, const RunConfig& config, int threads = 1);

/// Varies the amount of training data per cell; repetition_mode controls how
/// repeated training runs enter the decoder.
SweepResult sweep_training_size(const ExperimentSetup& base, const std::vector<double>& minutes_grid,
                                TrainRepetitionMode repetition_mode, const LoadedDataset& dataset,
                                const RunConfig& config, int threads = 1);

/// Test-side axis: number of repetition runs averaged before decoding.
SweepResult sweep_test_repetitions(const ExperimentSetup& base, const std::vector<int>& counts,
                                   const LoadedDataset& dataset, const RunConfig& config, int threads = 1);

struct FirCell {
  FirSpec spec;
  double cv_mr = 0.0;
  std::optional<std::string> error;
};

struct FirGridResult {
  std::vector<FirCell> cells;
  FirSpec selected;
  double selected_mr = 0.0;
};

/// Cross-validated MR on contiguous folds of the training data only.
/// Ties select the smaller lag, then the smaller window, then averaging.
FirGridResult gridsearch_fir(const LoadedDataset& dataset, const RunConfig& config, const std::string& subject,
                             const std::string& latent_type, const std::vector<int>& lags,
                             const std::vector<int>& windows, const std::vector<FirAggregation>& aggregations,
                             int folds = 3);

}  // namespace braindec
