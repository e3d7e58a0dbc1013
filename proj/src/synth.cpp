#include "braindec/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "braindec/errors.hpp"
#include "braindec/manifest.hpp"
#include "braindec/matrix_io.hpp"
#include "braindec/rng.hpp"

namespace braindec {

using nlohmann::json;

PermutationKind parse_permutation_kind(const std::string& name) {
  if (name == "identity") return PermutationKind::Identity;
  if (name == "rotation180") return PermutationKind::Rotation180;
  if (name == "random") return PermutationKind::Random;
  throw ValidationError("unknown permutation kind '" + name + "' (expected identity, rotation180 or random)");
}

std::string permutation_kind_name(PermutationKind kind) {
  switch (kind) {
    case PermutationKind::Identity: return "identity";
    case PermutationKind::Rotation180: return "rotation180";
    case PermutationKind::Random: return "random";
  }
  throw ValidationError("invalid permutation kind");
}

const SynthSubjectData& SynthDataset::subject(const std::string& id) const {
  for (const SynthSubjectData& s : subjects) {
    if (s.id == id) return s;
  }
  throw ValidationError("synthetic dataset: unknown subject '" + id + "'");
}

namespace {

void validate_spec(const SynthSpec& spec) {
  if (spec.grid.width < 1 || spec.grid.height < 1) throw ValidationError("synth: grid dimensions must be >= 1");
  if (spec.n_train < 2 || spec.n_test < 2) throw ValidationError("synth: need at least 2 frames per split");
  if (spec.latent_dim < 1) throw ValidationError("synth: latent_dim must be >= 1");
  if (!(spec.smoothness > 0.0)) throw ValidationError("synth: smoothness must be positive");
  if (!(spec.snr > 0.0)) throw ValidationError("synth: snr must be positive");
  if (spec.subjects.empty()) throw ValidationError("synth: need at least one subject");
  if (spec.train_repetitions < 1 || spec.test_repetitions < 1) {
    throw ValidationError("synth: repetition counts must be >= 1");
  }
  if (spec.response_lag < 0) throw ValidationError("synth: response_lag must be >= 0");
  if (spec.response_span < 1) throw ValidationError("synth: response_span must be >= 1");
  if (spec.drift_amplitude < 0.0) throw ValidationError("synth: drift_amplitude must be >= 0");
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

std::vector<int> build_permutation(PermutationKind kind, int v, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(v));
  switch (kind) {
    case PermutationKind::Identity:
      for (int i = 0; i < v; ++i) perm[static_cast<std::size_t>(i)] = i;
      break;
    case PermutationKind::Rotation180:
      for (int i = 0; i < v; ++i) perm[static_cast<std::size_t>(i)] = grid_rotation180(i, v);
      break;
    case PermutationKind::Random:
      perm = rng.permutation(v);
      break;
  }
  return perm;
}

// Response matrix for one split. The volume at time t mixes the latents of
// frames t-lag, t-lag-1, ..., t-lag-span+1 with geometrically decaying
// weights (unit total power), emulating a response that spreads over several
// volumes. Pre-stimulus latents cover the first lag+span-1 rows.
Matrix clean_response(const Matrix& latents, const Matrix& pre_latents, const Matrix& forward_map,
                      int lag, int span) {
  const Index n = latents.rows();
  Matrix extended(pre_latents.rows() + n, latents.cols());
  if (pre_latents.rows() > 0) extended.topRows(pre_latents.rows()) = pre_latents;
  extended.bottomRows(n) = latents;

  Vector weights(span);
  for (int s = 0; s < span; ++s) weights[s] = std::pow(0.6, s);
  weights /= weights.norm();

  Matrix mixed = Matrix::Zero(n, latents.cols());
  const Index offset = pre_latents.rows();  // lag + span - 1
  for (int s = 0; s < span; ++s) {
    // Volume t responds to the latent of frame t - lag - s.
    mixed += weights[s] * extended.middleRows(offset - lag - s, n);
  }
  return mixed * forward_map.transpose();
}

Matrix noisy_run(const Matrix& clean, const std::vector<int>& perm, const Vector& column_sd,
                 double drift_amplitude, Rng& rng) {
  const Index n = clean.rows();
  const auto v = static_cast<Index>(perm.size());
  Matrix run(n, v);
  for (Index j = 0; j < v; ++j) {
    const Index src = perm[static_cast<std::size_t>(j)];
    const double sd = column_sd[src];
    for (Index t = 0; t < n; ++t) run(t, j) = clean(t, src) + sd * rng.next_gaussian();
  }
  if (drift_amplitude > 0.0) {
    for (Index j = 0; j < v; ++j) {
      for (int k = 1; k <= 2; ++k) {
        const double coeff = drift_amplitude * rng.next_gaussian();
        for (Index t = 0; t < n; ++t) {
          run(t, j) += coeff * std::cos(std::numbers::pi * k * (static_cast<double>(t) + 0.5) / static_cast<double>(n));
        }
      }
    }
  }
  return run;
}

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
  validate_spec(spec);

  SynthDataset ds;
  ds.spec = spec;
  ds.geometry = grid_geometry(spec.grid.width, spec.grid.height, spec.grid.spacing);
  const Index v = ds.geometry.num_vertices();
  const Index m = spec.latent_dim;

  // Forward map: squared-exponential smoothing of white noise over the grid.
  Rng map_rng(derive_seed(spec.seed, "forward-map"));
  const Matrix white = gaussian_matrix(v, m, map_rng);
  const Matrix kernel =
      (-(ds.geometry.distances.array() / spec.smoothness).square() / 2.0).exp().matrix();
  const Matrix forward_map = kernel * white;
  const Vector signal_power = forward_map.rowwise().squaredNorm();
  const Vector column_sd = (signal_power / spec.snr).cwiseSqrt();

  Rng latent_rng(derive_seed(spec.seed, "latents"));
  ds.latents_train = gaussian_matrix(spec.n_train, m, latent_rng);
  ds.latents_test = gaussian_matrix(spec.n_test, m, latent_rng);
  Rng pre_rng(derive_seed(spec.seed, "pre-stimulus"));
  const Index pre_rows = spec.response_lag + spec.response_span - 1;
  const Matrix pre_train = gaussian_matrix(pre_rows, m, pre_rng);
  const Matrix pre_test = gaussian_matrix(pre_rows, m, pre_rng);

  ds.clean_train = clean_response(ds.latents_train, pre_train, forward_map, spec.response_lag, spec.response_span);
  ds.clean_test = clean_response(ds.latents_test, pre_test, forward_map, spec.response_lag, spec.response_span);

  for (std::size_t si = 0; si < spec.subjects.size(); ++si) {
    const SynthSubjectSpec& sub = spec.subjects[si];
    if (sub.permutation == PermutationKind::Rotation180 && !ds.geometry.grid) {
      throw ValidationError("synth: rotation180 requires a grid geometry");
    }
    SynthSubjectData data;
    data.id = sub.id;
    data.kind = sub.permutation;
    Rng perm_rng(derive_seed(spec.seed, "permutation", si));
    data.perm = build_permutation(sub.permutation, static_cast<int>(v), perm_rng);

    for (int r = 0; r < spec.train_repetitions; ++r) {
      Rng rng(derive_seed(spec.seed, "noise-" + sub.id + "-train", static_cast<std::uint64_t>(r)));
      data.train_runs.push_back(noisy_run(ds.clean_train, data.perm, column_sd, spec.drift_amplitude, rng));
    }
    for (int r = 0; r < spec.test_repetitions; ++r) {
      Rng rng(derive_seed(spec.seed, "noise-" + sub.id + "-test", static_cast<std::uint64_t>(r)));
      data.test_runs.push_back(noisy_run(ds.clean_test, data.perm, column_sd, spec.drift_amplitude, rng));
    }
    ds.subjects.push_back(std::move(data));
  }
  return ds;
}

std::vector<int> truth_correspondence(const std::vector<int>& perm_out, const std::vector<int>& perm_ref) {
  if (perm_out.size() != perm_ref.size()) throw ValidationError("truth_correspondence: permutation sizes differ");
  const auto v = perm_out.size();
  std::vector<int> inv_ref(v, -1);
  for (std::size_t j = 0; j < v; ++j) {
    const int target = perm_ref[j];
    if (target < 0 || static_cast<std::size_t>(target) >= v || inv_ref[static_cast<std::size_t>(target)] != -1) {
      throw ValidationError("truth_correspondence: perm_ref is not a bijection");
    }
    inv_ref[static_cast<std::size_t>(target)] = static_cast<int>(j);
  }
  std::vector<int> truth(v);
  std::vector<bool> seen(v, false);
  for (std::size_t i = 0; i < v; ++i) {
    const int target = perm_out[i];
    if (target < 0 || static_cast<std::size_t>(target) >= v || seen[static_cast<std::size_t>(target)]) {
      throw ValidationError("truth_correspondence: perm_out is not a bijection");
    }
    seen[static_cast<std::size_t>(target)] = true;
    truth[i] = inv_ref[static_cast<std::size_t>(target)];
  }
  return truth;
}

AlignQuality oracle_align_quality(const Matrix& plan, const std::vector<int>& truth) {
  if (plan.rows() != plan.cols()) throw ValidationError("oracle_align_quality: plan must be square");
  if (static_cast<Index>(truth.size()) != plan.rows()) {
    throw ValidationError("oracle_align_quality: truth size does not match the plan");
  }
  const double mass = plan.sum();
  if (!(mass > 0.0)) throw ValidationError("oracle_align_quality: plan carries no mass");

  int correct = 0;
  double on_truth = 0.0;
  for (Index i = 0; i < plan.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < plan.cols(); ++j) {
      if (plan(i, j) > plan(i, best)) best = j;  // ties resolve to the lowest index
    }
    const Index target = truth[static_cast<std::size_t>(i)];
    if (best == target) ++correct;
    on_truth += plan(i, target);
  }

  AlignQuality q;
  q.argmax_accuracy = static_cast<double>(correct) / static_cast<double>(plan.rows());
  q.mass_on_truth = on_truth / mass;
  return q;
}

void write_dataset(const SynthDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  write_matrix(ds.geometry.distances, dir / "geometry_D.fmat");
  write_matrix(Matrix(ds.geometry.weights), dir / "geometry_w.fmat");
  write_matrix(ds.latents_train, dir / "latents_train.fmat");
  write_matrix(ds.latents_test, dir / "latents_test.fmat");

  DatasetManifest manifest;
  manifest.root = dir;

  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  for (int r = 0; r < ds.spec.train_repetitions; ++r) train_ids.push_back("train-" + std::to_string(r));
  for (int r = 0; r < ds.spec.test_repetitions; ++r) test_ids.push_back("test-" + std::to_string(r));

  json truth_subjects = json::object();
  for (const SynthSubjectData& sub : ds.subjects) {
    SubjectRecord rec;
    rec.id = sub.id;
    rec.distances_file = "geometry_D.fmat";
    rec.weights_file = "geometry_w.fmat";
    rec.grid = ds.geometry.grid;
    for (int r = 0; r < ds.spec.train_repetitions; ++r) {
      const std::string file = sub.id + "_train-" + std::to_string(r) + ".fmat";
      write_matrix(sub.train_runs[static_cast<std::size_t>(r)], dir / file);
      rec.runs.push_back({train_ids[static_cast<std::size_t>(r)], "train", ds.spec.n_train, file});
    }
    for (int r = 0; r < ds.spec.test_repetitions; ++r) {
      const std::string file = sub.id + "_test-" + std::to_string(r) + ".fmat";
      write_matrix(sub.test_runs[static_cast<std::size_t>(r)], dir / file);
      rec.runs.push_back({test_ids[static_cast<std::size_t>(r)], "test", ds.spec.n_test, file});
    }
    manifest.subjects.push_back(std::move(rec));
    truth_subjects[sub.id] = {{"kind", permutation_kind_name(sub.kind)}, {"permutation", sub.perm}};
  }

  for (const std::string& id : train_ids) manifest.latents["synthetic"][id] = "latents_train.fmat";
  for (const std::string& id : test_ids) manifest.latents["synthetic"][id] = "latents_test.fmat";
  if (train_ids.size() > 1) manifest.repetition_groups.push_back(train_ids);
  if (test_ids.size() > 1) manifest.repetition_groups.push_back(test_ids);

  save_manifest(manifest, dir / "manifest.json");

  const json truth{{"seed", ds.spec.seed},
                   {"response_lag", ds.spec.response_lag},
                   {"response_span", ds.spec.response_span},
                   {"snr", ds.spec.snr},
                   {"subjects", truth_subjects}};
  std::ofstream out(dir / "ground_truth.json");
  if (!out) throw IoError("cannot write ground truth sidecar in " + dir.string());
  out << truth.dump(2) << '\n';
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synth spec " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }

  SynthSpec spec;
  try {
    if (j.contains("grid")) {
      spec.grid.width = j["grid"].value("width", spec.grid.width);
      spec.grid.height = j["grid"].value("height", spec.grid.height);
      spec.grid.spacing = j["grid"].value("spacing", spec.grid.spacing);
    }
    spec.n_train = j.value("n_train", spec.n_train);
    spec.n_test = j.value("n_test", spec.n_test);
    spec.latent_dim = j.value("latent_dim", spec.latent_dim);
    spec.smoothness = j.value("smoothness", spec.smoothness);
    spec.snr = j.value("snr", spec.snr);
    spec.train_repetitions = j.value("train_repetitions", spec.train_repetitions);
    spec.test_repetitions = j.value("test_repetitions", spec.test_repetitions);
    spec.seed = j.value("seed", spec.seed);
    spec.response_lag = j.value("response_lag", spec.response_lag);
    spec.response_span = j.value("response_span", spec.response_span);
    spec.drift_amplitude = j.value("drift_amplitude", spec.drift_amplitude);
    if (j.contains("subjects")) {
      for (const json& js : j["subjects"]) {
        SynthSubjectSpec sub;
        sub.id = js.at("id").get<std::string>();
        sub.permutation = parse_permutation_kind(js.value("permutation", std::string("identity")));
        spec.subjects.push_back(std::move(sub));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("synth spec " + path.string() + ": " + e.what());
  }
  return spec;
}

}  // namespace braindec
