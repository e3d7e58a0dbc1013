#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "braindec/config.hpp"
#include "braindec/errors.hpp"
#include "braindec/experiment.hpp"
#include "braindec/matrix_io.hpp"
#include "braindec/reports.hpp"
#include "braindec/rng.hpp"
#include "braindec/synth.hpp"
#include "braindec/transport.hpp"
#include "braindec/visual.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 1;
};

braindec::RunConfig resolve_config(const GlobalOptions& g) {
  braindec::RunConfig config;
  if (!g.config_path.empty()) config = braindec::load_run_config(g.config_path);
  if (g.seed) config.seed = *g.seed;
  braindec::validate_run_config(config);
  return config;
}

fs::path ensure_out_dir(const GlobalOptions& g) {
  fs::create_directories(g.out_dir);
  return g.out_dir;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    const std::size_t end = csv.find(',', begin);
    const std::string item = csv.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
    if (!item.empty()) grid.push_back(std::stod(item));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (grid.empty()) throw braindec::ValidationError("empty grid '" + csv + "'");
  return grid;
}

std::vector<int> parse_int_range(const std::string& text) {
  // "1:5" inclusive range or "1,2,3" list
  const std::size_t colon = text.find(':');
  std::vector<int> values;
  if (colon != std::string::npos) {
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    if (hi < lo) throw braindec::ValidationError("bad range '" + text + "'");
    for (int v = lo; v <= hi; ++v) values.push_back(v);
  } else {
    for (const double v : parse_grid(text)) values.push_back(static_cast<int>(v));
  }
  return values;
}

braindec::TransportPlan load_plan(const fs::path& plan_path) {
  braindec::FugwConfig config;
  return braindec::make_transport_plan(braindec::read_matrix_f64(plan_path), config);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Functional brain alignment and decoding toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON run configuration");
  std::uint64_t seed_value = 0;
  const auto* seed_opt = app.add_option("--seed", seed_value, "Root seed overriding the config");
  app.add_option("--out", global.out_dir, "Output directory");
  app.add_option("--threads", global.threads, "Worker threads for sweep cells")->check(CLI::PositiveNumber);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic multi-subject dataset");
  std::string synth_spec_path;
  simulate->add_option("--spec", synth_spec_path, "Synthetic dataset spec (JSON)")
      ->required()
      ;

  // align
  auto* align = app.add_subcommand("align", "Fit a transport plan between two subjects");
  std::string manifest_path;
  std::string subject_id;
  std::string reference_id;
  double align_minutes = -1.0;
  align->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  align->add_option("--subject", subject_id, "Left-out subject to align")->required();
  align->add_option("--reference", reference_id, "Reference subject")->required();
  align->add_option("--minutes", align_minutes, "Alignment data budget in minutes (default: all)");

  // transport
  auto* transport = app.add_subcommand("transport", "Apply a plan to a feature matrix");
  std::string plan_path;
  std::string input_path;
  std::string output_name = "transported.fmat";
  bool inverse = false;
  bool allow_dead = false;
  transport->add_option("--plan", plan_path, "Plan FMAT file")->required();
  transport->add_option("--input", input_path, "Feature matrix to transport")->required();
  transport->add_option("--output", output_name, "Output file name");
  transport->add_flag("--inverse", inverse, "Transport reference -> left-out via the transposed plan");
  transport->add_flag("--allow-dead-vertices", allow_dead, "Zero-fill reference vertices with no mass");

  // decode
  auto* decode = app.add_subcommand("decode", "Train a decoder for an experiment setup");
  std::string setup_path;
  decode->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  decode->add_option("--setup", setup_path, "Experiment setup (JSON)")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Retrieval metrics for prediction/truth matrices");
  std::string preds_path;
  std::string truths_path;
  std::string pool_path;
  evaluate->add_option("--preds", preds_path, "Predicted latents")->required();
  evaluate->add_option("--truths", truths_path, "Ground-truth latents")->required();
  evaluate->add_option("--pool", pool_path, "Retrieval pool (default: the truths)");

  // run-setup
  auto* run_setup_cmd = app.add_subcommand("run-setup", "Full pipeline for one experiment setup");
  run_setup_cmd->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  run_setup_cmd->add_option("--setup", setup_path, "Experiment setup (JSON)")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Grid of run-setup cells along one axis");
  std::string axis = "alignment-minutes";
  std::string grid_csv;
  std::string repetition_mode = "stack";
  sweep->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  sweep->add_option("--setup", setup_path, "Base experiment setup (JSON)")->required();
  sweep->add_option("--axis", axis, "alignment-minutes | train-minutes | test-repetitions")
      ->check(CLI::IsMember({"alignment-minutes", "train-minutes", "test-repetitions"}));
  sweep->add_option("--grid", grid_csv, "Comma-separated axis values")->required();
  sweep->add_option("--repetition-mode", repetition_mode, "stack | average | first (train-minutes axis)");

  // gridsearch-fir
  auto* gridsearch = app.add_subcommand("gridsearch-fir", "Cross-validated FIR lag/window selection");
  std::string gs_subject;
  std::string gs_latent;
  std::string lags = "1:5";
  std::string windows = "1:3";
  std::string aggregations = "average,stack";
  int folds = 3;
  gridsearch->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  gridsearch->add_option("--subject", gs_subject, "Subject (default: first in the manifest)");
  gridsearch->add_option("--latent", gs_latent, "Latent type (default: first in the manifest)");
  gridsearch->add_option("--lags", lags, "Lag range, e.g. 1:5 or 0,2,4");
  gridsearch->add_option("--windows", windows, "Window range, e.g. 1:3");
  gridsearch->add_option("--aggregations", aggregations, "average,stack");
  gridsearch->add_option("--folds", folds, "Contiguous CV folds")->check(CLI::PositiveNumber);

  // export-visual
  auto* export_visual = app.add_subcommand("export-visual", "Transport a colormap and write CSV + PPM");
  std::string colormap_path;
  export_visual->add_option("--plan", plan_path, "Plan FMAT file")->required();
  export_visual->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  export_visual->add_option("--reference", reference_id, "Reference subject (grid layout source)")->required();
  export_visual->add_option("--colormap", colormap_path, "v_out x 3 colormap FMAT (default: coordinate ramp)");
  export_visual->add_flag("--allow-dead-vertices", allow_dead, "Zero-fill reference vertices with no mass");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) global.seed = seed_value;
  const braindec::RunConfig config = resolve_config(global);
  const fs::path out_dir = ensure_out_dir(global);

  if (simulate->parsed()) {
    braindec::SynthSpec spec = braindec::load_synth_spec(synth_spec_path);
    if (global.seed) spec.seed = *global.seed;
    const braindec::SynthDataset dataset = braindec::generate(spec);
    braindec::write_dataset(dataset, out_dir);
    std::cout << "wrote dataset with " << dataset.subjects.size() << " subjects to " << out_dir.string() << "\n";
    return 0;
  }

  if (align->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const auto& ref = dataset.subject(reference_id);
    const auto& out_subject = dataset.subject(subject_id);
    braindec::FugwProblem problem;
    {
      std::vector<braindec::LoadedRun> ref_runs = ref.train_runs;
      braindec::Matrix x_ref;
      braindec::Matrix x_out;
      braindec::Index frames = align_minutes > 0.0 ? config.minutes_to_frames(align_minutes) : -1;
      const auto concat = [&](const braindec::LoadedSubject& s) {
        braindec::Index total = 0;
        for (const auto& run : s.train_runs) total += run.features.rows();
        braindec::Matrix all(total, s.geom.num_vertices());
        braindec::Index at = 0;
        for (const auto& run : s.train_runs) {
          braindec::Matrix pre = braindec::standardize(
              braindec::detrend_cosine(run.features, config.detrend_order_for(run.features.rows())));
          all.middleRows(at, pre.rows()) = pre;
          at += pre.rows();
        }
        if (frames > total) {
          throw braindec::ValidationError("align: requested " + std::to_string(frames) +
                                          " frames but subject '" + s.id + "' only has " + std::to_string(total));
        }
        if (frames > 0) return braindec::Matrix(all.topRows(frames));
        return all;
      };
      x_ref = concat(ref);
      x_out = concat(out_subject);
      problem.X_out = std::move(x_out);
      problem.X_ref = std::move(x_ref);
    }
    problem.geom_out = out_subject.geom;
    problem.geom_ref = ref.geom;
    problem.config = config.fugw;
    const braindec::TransportPlan plan = braindec::solve_fugw(problem);

    braindec::write_matrix(plan.plan, out_dir / "plan.fmat");
    const auto diagnostics = braindec::plan_diagnostics(plan, out_subject.geom, ref.geom);
    json sidecar = braindec::plan_sidecar(plan, diagnostics);
    sidecar["subject"] = subject_id;
    sidecar["reference"] = reference_id;
    sidecar["alignment_frames"] = problem.X_ref.rows();
    braindec::write_json(sidecar, out_dir / "plan.json");
    std::cout << "wrote plan.fmat and plan.json to " << out_dir.string() << "\n";
    return 0;
  }

  if (transport->parsed()) {
    braindec::TransportPlan plan = load_plan(plan_path);
    if (inverse) plan = braindec::transpose_plan(plan);
    const braindec::Matrix features = braindec::read_matrix_f64(input_path);
    const braindec::Matrix out = braindec::apply_plan(plan, features, allow_dead);
    braindec::write_matrix(out, out_dir / output_name);
    std::cout << "wrote " << (out_dir / output_name).string() << "\n";
    return 0;
  }

  if (decode->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const auto setup = braindec::load_setup(setup_path);
    const braindec::SetupResult result = braindec::run_setup(setup, dataset, config);

    braindec::write_matrix(result.model.weights, out_dir / "weights.fmat");
    braindec::write_matrix(braindec::Matrix(result.model.bias), out_dir / "bias.fmat");
    json meta{{"alpha_ridge", result.model.alpha_ridge},
              {"fir",
               {{"lag", result.model.fir.lag},
                {"window", result.model.fir.window},
                {"aggregation", braindec::aggregation_name(result.model.fir.aggregation)}}},
              {"training_meta",
               {{"subjects", result.model.meta.subjects},
                {"rows", result.model.meta.rows},
                {"alignment", result.model.meta.alignment}}},
              {"version", braindec::kToolVersion}};
    braindec::write_json(meta, out_dir / "decoder.json");
    braindec::write_json(braindec::to_json(result, config), out_dir / "report.json");
    std::cout << "wrote decoder model and report to " << out_dir.string() << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const braindec::Matrix preds = braindec::read_matrix_f64(preds_path);
    const braindec::Matrix truths = braindec::read_matrix_f64(truths_path);
    const braindec::Matrix pool = pool_path.empty() ? truths : braindec::read_matrix_f64(pool_path);
    braindec::RetrievalConfig rc = config.retrieval;
    if (rc.seed == 0) rc.seed = braindec::derive_seed(config.seed, "retrieval");
    const auto report = braindec::evaluate_retrieval(preds, truths, pool, rc);
    braindec::write_json(braindec::to_json(report), out_dir / "retrieval.json");
    braindec::write_retrieval_csv(report, out_dir / "retrieval.csv");
    std::cout << "MR " << report.median_relative_rank << ", top-" << report.k << " " << report.topk_accuracy
              << " (wrote retrieval.json / retrieval.csv)\n";
    return 0;
  }

  if (run_setup_cmd->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const auto setup = braindec::load_setup(setup_path);
    const braindec::SetupResult result = braindec::run_setup(setup, dataset, config);
    braindec::write_json(braindec::to_json(result, config), out_dir / "report.json");
    braindec::write_retrieval_csv(result.report, out_dir / "per_set.csv");
    std::cout << "MR " << result.report.median_relative_rank << ", top-" << result.report.k << " "
              << result.report.topk_accuracy << " (wrote report.json)\n";
    return 0;
  }

  if (sweep->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const auto setup = braindec::load_setup(setup_path);
    braindec::SweepResult result;
    if (axis == "alignment-minutes") {
      result = braindec::sweep_alignment_data(setup, parse_grid(grid_csv), dataset, config, global.threads);
    } else if (axis == "train-minutes") {
      result = braindec::sweep_training_size(setup, parse_grid(grid_csv),
                                             braindec::parse_train_repetition_mode(repetition_mode), dataset,
                                             config, global.threads);
    } else {
      std::vector<int> counts;
      for (const double v : parse_grid(grid_csv)) counts.push_back(static_cast<int>(v));
      result = braindec::sweep_test_repetitions(setup, counts, dataset, config, global.threads);
    }
    braindec::write_json(braindec::to_json(result, config), out_dir / "sweep.json");
    std::cout << "swept " << result.cells.size() << " cells along " << result.axis << ", Spearman(MR) "
              << result.spearman_mr << " (wrote sweep.json)\n";
    return 0;
  }

  if (gridsearch->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const std::string subject = gs_subject.empty() ? dataset.subjects.front().id : gs_subject;
    std::vector<braindec::FirAggregation> aggs;
    for (const auto& name : {std::string("average"), std::string("stack")}) {
      if (aggregations.find(name) != std::string::npos) aggs.push_back(braindec::parse_aggregation(name));
    }
    const auto result = braindec::gridsearch_fir(dataset, config, subject, gs_latent, parse_int_range(lags),
                                                 parse_int_range(windows), aggs, folds);
    braindec::write_json(braindec::to_json(result, config), out_dir / "gridsearch.json");
    std::cout << "selected lag " << result.selected.lag << ", window " << result.selected.window << ", "
              << braindec::aggregation_name(result.selected.aggregation) << " (cv MR " << result.selected_mr
              << ")\n";
    return 0;
  }

  if (export_visual->parsed()) {
    const auto manifest = braindec::load_manifest(manifest_path);
    const auto dataset = braindec::load_dataset(manifest);
    const braindec::TransportPlan plan = load_plan(plan_path);
    const auto& ref = dataset.subject(reference_id);
    braindec::Matrix colormap;
    if (!colormap_path.empty()) {
      colormap = braindec::read_matrix_f64(colormap_path);
    } else {
      braindec::GridShape shape;
      if (plan.plan.rows() == ref.geom.num_vertices() && ref.geom.grid) {
        shape = *ref.geom.grid;
      } else {
        throw braindec::ValidationError("export-visual: pass --colormap when the source grid layout is unknown");
      }
      colormap = braindec::default_grid_colormap(shape);
    }
    const auto paths = braindec::export_plan_visual(plan, ref.geom, colormap, out_dir, allow_dead);
    std::cout << "wrote " << paths.csv.string() << " and " << paths.ppm.string() << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const braindec::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const braindec::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const braindec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
