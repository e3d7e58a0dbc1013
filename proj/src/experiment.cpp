#include "braindec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "braindec/errors.hpp"
#include "braindec/matrix_io.hpp"
#include "braindec/rng.hpp"
#include "braindec/synth.hpp"
#include "braindec/transport.hpp"

namespace braindec {

using nlohmann::json;

TrainRepetitionMode parse_train_repetition_mode(const std::string& name) {
  if (name == "stack") return TrainRepetitionMode::Stack;
  if (name == "average") return TrainRepetitionMode::Average;
  if (name == "first") return TrainRepetitionMode::First;
  throw ValidationError("unknown repetition mode '" + name + "' (expected stack, average or first)");
}

std::string train_repetition_mode_name(TrainRepetitionMode mode) {
  switch (mode) {
    case TrainRepetitionMode::Stack: return "stack";
    case TrainRepetitionMode::Average: return "average";
    case TrainRepetitionMode::First: return "first";
  }
  throw ValidationError("invalid repetition mode");
}

ExperimentSetup load_setup(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open setup " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }

  ExperimentSetup s;
  try {
    s.train_subjects = j.at("train_subjects").get<std::vector<std::string>>();
    s.test_subject = j.at("test_subject").get<std::string>();
    if (j.contains("alignment") && !j["alignment"].is_null()) {
      const json& a = j["alignment"];
      const std::string kind = a.value("kind", std::string("none"));
      if (kind == "functional") {
        s.alignment.kind = AlignmentSpec::Kind::Functional;
        s.alignment.reference = a.at("reference").get<std::string>();
        s.alignment.minutes = a.value("minutes", -1.0);
      } else if (kind != "none") {
        throw ValidationError("setup: unknown alignment kind '" + kind + "'");
      }
    }
    s.train_minutes = j.value("train_minutes", -1.0);
    if (j.contains("train_repetitions")) {
      s.train_repetitions = parse_train_repetition_mode(j["train_repetitions"].get<std::string>());
    }
    if (j.contains("test_repetitions")) {
      const json& t = j["test_repetitions"];
      if (t.is_string() && t.get<std::string>() == "stack") {
        s.test_repetitions.stack = true;
      } else if (t.is_object()) {
        s.test_repetitions.stack = t.value("stack", false);
        s.test_repetitions.average_count = t.value("average", 1);
      } else {
        throw ValidationError("setup: test_repetitions must be \"stack\" or an object");
      }
    }
    s.latent_type = j.value("latent_type", std::string());
    if (j.contains("fir")) {
      const json& f = j["fir"];
      s.fir.lag = f.value("lag", s.fir.lag);
      s.fir.window = f.value("window", s.fir.window);
      if (f.contains("aggregation")) s.fir.aggregation = parse_aggregation(f["aggregation"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError("setup " + path.string() + ": " + e.what());
  }
  return s;
}

const LoadedSubject& LoadedDataset::subject(const std::string& id) const {
  for (const LoadedSubject& s : subjects) {
    if (s.id == id) return s;
  }
  throw ValidationError("dataset: unknown subject '" + id + "'");
}

const Matrix& LoadedDataset::latent(const std::string& type, const std::string& run_id) const {
  const auto type_it = latents.find(type);
  if (type_it == latents.end()) throw ValidationError("dataset: unknown latent type '" + type + "'");
  const auto run_it = type_it->second.find(run_id);
  if (run_it == type_it->second.end()) {
    throw ValidationError("dataset: latent type '" + type + "' has no entry for run '" + run_id + "'");
  }
  return run_it->second;
}

std::string LoadedDataset::first_latent_type() const {
  if (latents.empty()) throw ValidationError("dataset: no latent types");
  return latents.begin()->first;
}

LoadedDataset load_dataset(const DatasetManifest& manifest) {
  LoadedDataset ds;
  for (const SubjectRecord& rec : manifest.subjects) {
    LoadedSubject sub;
    sub.id = rec.id;
    sub.geom.distances = read_matrix_f64(manifest.resolve(rec.distances_file));
    sub.geom.weights = read_matrix_f64(manifest.resolve(rec.weights_file)).reshaped();
    sub.geom.grid = rec.grid;
    validate_geometry(sub.geom);
    for (const RunRef& run : rec.runs) {
      Matrix features = read_matrix_f64(manifest.resolve(run.features));
      if (features.rows() != run.rows) {
        throw ValidationError("dataset: run '" + run.id + "' row mismatch against the manifest");
      }
      LoadedRun loaded{run.id, std::move(features)};
      if (run.split == "train") {
        sub.train_runs.push_back(std::move(loaded));
      } else if (run.split == "test") {
        sub.test_runs.push_back(std::move(loaded));
      } else {
        throw ValidationError("dataset: run '" + run.id + "' has unknown split '" + run.split + "'");
      }
    }
    ds.subjects.push_back(std::move(sub));
  }
  for (const auto& [type, files] : manifest.latents) {
    for (const auto& [run_id, file] : files) {
      ds.latents[type][run_id] = read_matrix_f64(manifest.resolve(file));
    }
  }
  ds.repetition_groups = manifest.repetition_groups;
  return ds;
}

LoadedDataset dataset_from_synth(const SynthDataset& synth) {
  LoadedDataset ds;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  for (int r = 0; r < synth.spec.train_repetitions; ++r) train_ids.push_back("train-" + std::to_string(r));
  for (int r = 0; r < synth.spec.test_repetitions; ++r) test_ids.push_back("test-" + std::to_string(r));

  for (const SynthSubjectData& sub : synth.subjects) {
    LoadedSubject loaded;
    loaded.id = sub.id;
    loaded.geom = synth.geometry;
    for (std::size_t r = 0; r < sub.train_runs.size(); ++r) loaded.train_runs.push_back({train_ids[r], sub.train_runs[r]});
    for (std::size_t r = 0; r < sub.test_runs.size(); ++r) loaded.test_runs.push_back({test_ids[r], sub.test_runs[r]});
    ds.subjects.push_back(std::move(loaded));
  }
  for (const std::string& id : train_ids) ds.latents["synthetic"][id] = synth.latents_train;
  for (const std::string& id : test_ids) ds.latents["synthetic"][id] = synth.latents_test;
  if (train_ids.size() > 1) ds.repetition_groups.push_back(train_ids);
  if (test_ids.size() > 1) ds.repetition_groups.push_back(test_ids);
  return ds;
}

namespace {

Matrix preprocess_run(const Matrix& run, const RunConfig& config) {
  return standardize(detrend_cosine(run, config.detrend_order_for(run.rows())));
}

Matrix truncate_rows(const Matrix& m, Index rows) {
  if (rows < 0 || rows >= m.rows()) return m;
  return m.topRows(rows);
}

// Repetition groups of one subject's runs, in first-appearance order; runs
// outside any declared group form singleton groups.
std::vector<std::vector<const LoadedRun*>> group_runs(const std::vector<LoadedRun>& runs,
                                                      const std::vector<std::vector<std::string>>& groups) {
  std::map<std::string, int> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const std::string& id : groups[g]) group_of[id] = static_cast<int>(g);
  }
  std::vector<std::vector<const LoadedRun*>> out;
  std::map<int, std::size_t> seen;
  for (const LoadedRun& run : runs) {
    const auto it = group_of.find(run.id);
    if (it == group_of.end()) {
      out.push_back({&run});
      continue;
    }
    const auto seen_it = seen.find(it->second);
    if (seen_it == seen.end()) {
      seen[it->second] = out.size();
      out.push_back({&run});
    } else {
      out[seen_it->second].push_back(&run);
    }
  }
  return out;
}

struct PreparedRun {
  std::string latent_run_id;
  Matrix features;  // preprocessed, optionally transported, pre-FIR
};

// Preprocess (and transport) a subject's runs, then collapse repetition
// groups according to the mode.
std::vector<PreparedRun> prepare_runs(const std::vector<LoadedRun>& runs,
                                      const std::vector<std::vector<std::string>>& groups,
                                      const RunConfig& config, const TransportPlan* plan,
                                      TrainRepetitionMode mode, int average_count) {
  std::vector<PreparedRun> prepared;
  for (const auto& group : group_runs(runs, groups)) {
    std::vector<Matrix> members;
    for (const LoadedRun* run : group) {
      Matrix x = preprocess_run(run->features, config);
      if (plan != nullptr) x = apply_plan(*plan, x);
      members.push_back(std::move(x));
      if (mode == TrainRepetitionMode::First) break;
    }
    switch (mode) {
      case TrainRepetitionMode::Stack:
        for (std::size_t i = 0; i < members.size(); ++i) {
          prepared.push_back({group[i]->id, std::move(members[i])});
        }
        break;
      case TrainRepetitionMode::First:
        prepared.push_back({group.front()->id, std::move(members.front())});
        break;
      case TrainRepetitionMode::Average: {
        const auto count = average_count > 0 ? std::min<std::size_t>(members.size(), static_cast<std::size_t>(average_count))
                                             : members.size();
        if (average_count > 0 && members.size() < static_cast<std::size_t>(average_count)) {
          throw ValidationError("repetition averaging requested " + std::to_string(average_count) +
                                " runs but the group of '" + group.front()->id + "' has only " +
                                std::to_string(members.size()));
        }
        Matrix mean = members.front();
        for (std::size_t i = 1; i < count; ++i) mean += members[i];
        mean /= static_cast<double>(count);
        prepared.push_back({group.front()->id, std::move(mean)});
        break;
      }
    }
  }
  return prepared;
}

// FIR both sides and stack rows across prepared runs.
std::pair<Matrix, Matrix> fir_and_stack(const std::vector<PreparedRun>& runs, const LoadedDataset& dataset,
                                        const std::string& latent_type, const FirSpec& fir, Index max_frames) {
  std::vector<Matrix> xs;
  std::vector<Matrix> ys;
  Index total = 0;
  Index cols_x = 0;
  Index cols_y = 0;
  for (const PreparedRun& run : runs) {
    const Matrix features = truncate_rows(run.features, max_frames);
    const Matrix& latent_full = dataset.latent(latent_type, run.latent_run_id);
    if (latent_full.rows() < run.features.rows()) {
      throw ValidationError("run '" + run.latent_run_id + "' has more feature rows than latent rows");
    }
    const Matrix latents = truncate_rows(latent_full.topRows(run.features.rows()), max_frames);
    Matrix x = fir_features(features, fir);
    Matrix y = latents.topRows(x.rows());
    total += x.rows();
    cols_x = x.cols();
    cols_y = y.cols();
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  Matrix X(total, cols_x);
  Matrix Y(total, cols_y);
  Index at = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X.middleRows(at, xs[i].rows()) = xs[i];
    Y.middleRows(at, xs[i].rows()) = ys[i];
    at += xs[i].rows();
  }
  return {std::move(X), std::move(Y)};
}

// Time-locked alignment matrices for a subject pair: preprocessed train runs
// concatenated in the reference's run order, truncated to `frames`.
Matrix alignment_matrix(const LoadedSubject& subject, const std::vector<std::string>& run_order,
                        const RunConfig& config, Index frames) {
  std::vector<const LoadedRun*> ordered;
  for (const std::string& id : run_order) {
    for (const LoadedRun& run : subject.train_runs) {
      if (run.id == id) ordered.push_back(&run);
    }
  }
  if (ordered.empty()) throw ValidationError("alignment: subject '" + subject.id + "' has no paired training runs");
  Index total = 0;
  for (const LoadedRun* run : ordered) total += run->features.rows();
  Matrix out(total, subject.geom.num_vertices());
  Index at = 0;
  for (const LoadedRun* run : ordered) {
    out.middleRows(at, run->features.rows()) = preprocess_run(run->features, config);
    at += run->features.rows();
  }
  if (frames >= 0 && frames > total) {
    throw ValidationError("alignment: requested " + std::to_string(frames) + " frames but subject '" + subject.id +
                          "' only has " + std::to_string(total));
  }
  return truncate_rows(out, frames);
}

}  // namespace

SetupResult run_setup(const ExperimentSetup& setup, const LoadedDataset& dataset, const RunConfig& config) {
  validate_run_config(config);
  if (setup.train_subjects.empty()) throw ValidationError("setup: train_subjects must be non-empty");
  const std::string latent_type = setup.latent_type.empty() ? dataset.first_latent_type() : setup.latent_type;

  const bool aligned = setup.alignment.kind == AlignmentSpec::Kind::Functional;
  if (aligned) {
    const bool ref_in_train = std::find(setup.train_subjects.begin(), setup.train_subjects.end(),
                                        setup.alignment.reference) != setup.train_subjects.end();
    if (!ref_in_train) throw ValidationError("setup: functional alignment requires the reference among train_subjects");
  }

  SetupResult result;
  result.setup = setup;
  result.setup.latent_type = latent_type;

  // Fit one plan per non-reference subject that contributes data.
  std::map<std::string, TransportPlan> plans;
  if (aligned) {
    const std::string& ref_id = setup.alignment.reference;
    const LoadedSubject& ref = dataset.subject(ref_id);
    std::vector<std::string> ref_run_order;
    for (const LoadedRun& run : ref.train_runs) ref_run_order.push_back(run.id);

    const Index frames = setup.alignment.minutes > 0.0 ? config.minutes_to_frames(setup.alignment.minutes) : -1;
    std::set<std::string> to_align(setup.train_subjects.begin(), setup.train_subjects.end());
    to_align.insert(setup.test_subject);
    to_align.erase(ref_id);

    const Matrix x_ref = alignment_matrix(ref, ref_run_order, config, frames);
    result.alignment_frames = static_cast<int>(x_ref.rows());
    for (const std::string& id : to_align) {
      const LoadedSubject& out_subject = dataset.subject(id);
      FugwProblem problem;
      problem.X_out = alignment_matrix(out_subject, ref_run_order, config, frames);
      problem.X_ref = x_ref;
      problem.geom_out = out_subject.geom;
      problem.geom_ref = ref.geom;
      problem.config = config.fugw;
      if (problem.X_out.rows() != problem.X_ref.rows()) {
        throw ValidationError("alignment: subjects '" + id + "' and '" + ref_id + "' are not time-locked");
      }
      plans.emplace(id, solve_fugw(problem));
    }
  }

  const auto plan_for = [&](const std::string& id) -> const TransportPlan* {
    const auto it = plans.find(id);
    return it == plans.end() ? nullptr : &it->second;
  };

  // Training set: per-subject prepared runs, FIR'd and stacked.
  const Index train_frames = setup.train_minutes > 0.0 ? config.minutes_to_frames(setup.train_minutes) : -1;
  std::vector<Matrix> x_parts;
  std::vector<Matrix> y_parts;
  Index train_rows = 0;
  for (const std::string& id : setup.train_subjects) {
    const LoadedSubject& sub = dataset.subject(id);
    if (sub.train_runs.empty()) throw ValidationError("setup: subject '" + id + "' has no training runs");
    const auto prepared = prepare_runs(sub.train_runs, dataset.repetition_groups, config, plan_for(id),
                                       setup.train_repetitions, -1);
    auto [x, y] = fir_and_stack(prepared, dataset, latent_type, setup.fir, train_frames);
    train_rows += x.rows();
    x_parts.push_back(std::move(x));
    y_parts.push_back(std::move(y));
  }
  Matrix X_train(train_rows, x_parts.front().cols());
  Matrix Y_train(train_rows, y_parts.front().cols());
  Index at = 0;
  for (std::size_t i = 0; i < x_parts.size(); ++i) {
    X_train.middleRows(at, x_parts[i].rows()) = x_parts[i];
    Y_train.middleRows(at, x_parts[i].rows()) = y_parts[i];
    at += x_parts[i].rows();
  }

  DecoderModel model = fit_ridge(X_train, Y_train, config.alpha_ridge);
  model.fir = setup.fir;
  model.meta.subjects = setup.train_subjects;
  model.meta.rows = train_rows;
  model.meta.alignment = aligned ? "functional(" + setup.alignment.reference + ")" : "none";

  // Test side: transported when the test subject is not the reference.
  const LoadedSubject& test_subject = dataset.subject(setup.test_subject);
  if (test_subject.test_runs.empty()) {
    throw ValidationError("setup: subject '" + setup.test_subject + "' has no test runs");
  }
  const TransportPlan* test_plan = aligned && setup.test_subject != setup.alignment.reference
                                       ? plan_for(setup.test_subject)
                                       : nullptr;
  if (aligned && setup.test_subject != setup.alignment.reference && test_plan == nullptr) {
    throw ValidationError("setup: missing alignment plan for test subject '" + setup.test_subject + "'");
  }
  const auto test_mode = setup.test_repetitions.stack ? TrainRepetitionMode::Stack : TrainRepetitionMode::Average;
  const auto prepared_test = prepare_runs(test_subject.test_runs, dataset.repetition_groups, config, test_plan,
                                          test_mode, setup.test_repetitions.stack ? -1 : setup.test_repetitions.average_count);
  auto [X_test, Y_test] = fir_and_stack(prepared_test, dataset, latent_type, setup.fir, -1);
  result.test_rows = X_test.rows();

  const Matrix preds = predict(model, X_test);
  RetrievalConfig retrieval = config.retrieval;
  if (retrieval.seed == 0) retrieval.seed = derive_seed(config.seed, "retrieval");
  result.report = evaluate_retrieval(preds, Y_test, Y_test, retrieval);
  result.train_rows = train_rows;
  result.model = std::move(model);
  return result;
}

SetupResult run_setup(const ExperimentSetup& setup, const DatasetManifest& manifest, const RunConfig& config) {
  return run_setup(setup, load_dataset(manifest), config);
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("spearman_correlation: need two sequences of equal length >= 2");
  }
  const auto rank = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j));
      for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
      i = j + 1;
    }
    return ranks;
  };
  const std::vector<double> rx = rank(x);
  const std::vector<double> ry = rank(y);
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

SweepResult run_sweep(const std::string& axis, std::vector<SweepCell> cells, const LoadedDataset& dataset,
                      const RunConfig& config, int threads) {
  if (cells.empty()) throw ValidationError("sweep: empty grid");
  threads = std::max(1, threads);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        cells[i].result = run_setup(cells[i].setup, dataset, config);
      } catch (const Error& e) {
        cells[i].error = e.what();
      }
    }
  };
  if (threads == 1 || cells.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), cells.size());
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SweepResult result;
  result.axis = axis;
  std::vector<double> axis_values;
  std::vector<double> mrs;
  for (const SweepCell& cell : cells) {
    if (cell.result) {
      axis_values.push_back(cell.axis_value);
      mrs.push_back(cell.result->report.median_relative_rank);
    }
  }
  result.spearman_mr = axis_values.size() >= 2 ? spearman_correlation(axis_values, mrs) : 0.0;
  result.cells = std::move(cells);
  return result;
}

}  // namespace

SweepResult sweep_alignment_data(const ExperimentSetup& base, const std::vector<double>& minutes_grid,
                                 const LoadedDataset& dataset, const RunConfig& config, int threads) {
  if (minutes_grid.empty()) throw ValidationError("sweep_alignment_data: empty minutes grid");
  if (base.alignment.kind != AlignmentSpec::Kind::Functional) {
    throw ValidationError("sweep_alignment_data: the base setup must use functional alignment");
  }
  std::vector<SweepCell> cells;
  for (const double minutes : minutes_grid) {
    SweepCell cell;
    cell.axis_value = minutes;
    cell.setup = base;
    cell.setup.alignment.minutes = minutes;
    cells.push_back(std::move(cell));
  }
  return run_sweep("alignment_minutes", std::move(cells), dataset, config, threads);
}

SweepResult sweep_training_size(const ExperimentSetup& base, const std::vector<double>& minutes_grid,
                                TrainRepetitionMode repetition_mode, const LoadedDataset& dataset,
                                const RunConfig& config, int threads) {
  if (minutes_grid.empty()) throw ValidationError("sweep_training_size: empty minutes grid");
  std::vector<SweepCell> cells;
  for (const double minutes : minutes_grid) {
    SweepCell cell;
    cell.axis_value = minutes;
    cell.setup = base;
    cell.setup.train_minutes = minutes;
    cell.setup.train_repetitions = repetition_mode;
    cells.push_back(std::move(cell));
  }
  return run_sweep("train_minutes", std::move(cells), dataset, config, threads);
}

SweepResult sweep_test_repetitions(const ExperimentSetup& base, const std::vector<int>& counts,
                                   const LoadedDataset& dataset, const RunConfig& config, int threads) {
  if (counts.empty()) throw ValidationError("sweep_test_repetitions: empty grid");
  std::vector<SweepCell> cells;
  for (const int count : counts) {
    SweepCell cell;
    cell.axis_value = count;
    cell.setup = base;
    cell.setup.test_repetitions.stack = false;
    cell.setup.test_repetitions.average_count = count;
    cells.push_back(std::move(cell));
  }
  return run_sweep("test_repetitions", std::move(cells), dataset, config, threads);
}

FirGridResult gridsearch_fir(const LoadedDataset& dataset, const RunConfig& config, const std::string& subject,
                             const std::string& latent_type, const std::vector<int>& lags,
                             const std::vector<int>& windows, const std::vector<FirAggregation>& aggregations,
                             int folds) {
  if (lags.empty() || windows.empty() || aggregations.empty()) {
    throw ValidationError("gridsearch_fir: lag, window and aggregation ranges must be non-empty");
  }
  if (folds < 2) throw ValidationError("gridsearch_fir: need at least 2 folds");

  const LoadedSubject& sub = dataset.subject(subject);
  if (sub.train_runs.empty()) throw ValidationError("gridsearch_fir: subject has no training runs");
  const std::string type = latent_type.empty() ? dataset.first_latent_type() : latent_type;

  // Average repetition runs, then concatenate the groups' features/latents.
  const auto prepared = prepare_runs(sub.train_runs, dataset.repetition_groups, config, nullptr,
                                     TrainRepetitionMode::Average, -1);
  std::vector<std::pair<Matrix, Matrix>> blocks;  // (features, latents), contiguous folds
  for (const PreparedRun& run : prepared) {
    const Matrix& latents = dataset.latent(type, run.latent_run_id);
    const Index n = run.features.rows();
    const Index base_size = n / folds;
    if (base_size < 2) throw ValidationError("gridsearch_fir: folds would be shorter than 2 frames");
    for (int f = 0; f < folds; ++f) {
      const Index begin = f * base_size;
      const Index size = f + 1 == folds ? n - begin : base_size;
      blocks.emplace_back(run.features.middleRows(begin, size), latents.middleRows(begin, size));
    }
  }

  FirGridResult result;
  std::uint64_t cell_index = 0;
  for (const FirAggregation agg : aggregations) {
    for (const int window : windows) {
      for (const int lag : lags) {
        FirCell cell;
        cell.spec = FirSpec{lag, window, agg};
        try {
          std::vector<double> fold_mrs;
          for (std::size_t hold = 0; hold < blocks.size(); ++hold) {
            std::vector<Matrix> xs;
            std::vector<Matrix> ys;
            Index rows = 0;
            for (std::size_t b = 0; b < blocks.size(); ++b) {
              if (b == hold) continue;
              Matrix x = fir_features(blocks[b].first, cell.spec);
              ys.push_back(blocks[b].second.topRows(x.rows()));
              rows += x.rows();
              xs.push_back(std::move(x));
            }
            Matrix X(rows, xs.front().cols());
            Matrix Y(rows, ys.front().cols());
            Index at = 0;
            for (std::size_t b = 0; b < xs.size(); ++b) {
              X.middleRows(at, xs[b].rows()) = xs[b];
              Y.middleRows(at, xs[b].rows()) = ys[b];
              at += xs[b].rows();
            }
            const DecoderModel model = fit_ridge(X, Y, config.alpha_ridge);

            const Matrix x_val = fir_features(blocks[hold].first, cell.spec);
            const Matrix y_val = blocks[hold].second.topRows(x_val.rows());
            const Matrix preds = predict(model, x_val);

            RetrievalConfig rc = config.retrieval;
            rc.set_size = std::min<int>(rc.set_size, static_cast<int>(y_val.rows()) - 2);
            rc.num_sets = std::min(rc.num_sets, 10);
            if (rc.set_size < 1) throw ValidationError("gridsearch_fir: validation fold too small for retrieval");
            rc.seed = derive_seed(config.seed, "fir-cv", cell_index * 1000 + hold);
            fold_mrs.push_back(evaluate_retrieval(preds, y_val, y_val, rc).median_relative_rank);
          }
          cell.cv_mr = std::accumulate(fold_mrs.begin(), fold_mrs.end(), 0.0) / static_cast<double>(fold_mrs.size());
        } catch (const Error& e) {
          cell.error = e.what();
        }
        result.cells.push_back(std::move(cell));
        ++cell_index;
      }
    }
  }

  // Argmin with ties toward smaller lag, then smaller window, then averaging.
  const FirCell* best = nullptr;
  for (const FirCell& cell : result.cells) {
    if (cell.error) continue;
    if (best == nullptr) {
      best = &cell;
      continue;
    }
    const auto key = [](const FirCell& c) {
      return std::make_tuple(c.cv_mr, c.spec.lag, c.spec.window, c.spec.aggregation == FirAggregation::Stack ? 1 : 0);
    };
    if (key(cell) < key(*best)) best = &cell;
  }
  if (best == nullptr) throw ValidationError("gridsearch_fir: every cell failed");
  result.selected = best->spec;
  result.selected_mr = best->cv_mr;
  return result;
}

}  // namespace braindec
