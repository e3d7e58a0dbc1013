#include "braindec/reports.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "braindec/errors.hpp"

namespace braindec {

using nlohmann::json;

const char* const kToolVersion = "braindec 0.1.0";

json to_json(const RetrievalReport& r) {
  return json{{"median_relative_rank", r.median_relative_rank},
              {"topk_accuracy", r.topk_accuracy},
              {"k", r.k},
              {"set_size", r.set_size},
              {"num_sets", r.num_sets},
              {"seed", r.seed},
              {"per_set_mr", r.per_set_mr},
              {"per_set_topk", r.per_set_topk},
              {"sem", {{"mr", r.sem_mr}, {"topk", r.sem_topk}}},
              // rank counting is strict, so equal-similarity ties favor the truth
              {"topk_candidates", "truth plus set_size negatives"}};
}

json to_json(const FugwConfig& c) {
  return json{{"alpha", c.alpha},
              {"rho", c.rho},
              {"epsilon", c.epsilon},
              {"bcd_iters", c.bcd_iters},
              {"sinkhorn_iters", c.sinkhorn_iters},
              {"normalize_costs", c.normalize_costs}};
}

json to_json(const RunConfig& c) {
  return json{{"fugw", to_json(c.fugw)},
              {"ridge", {{"alpha_ridge", c.alpha_ridge}}},
              {"fir", {{"lag", c.fir.lag}, {"window", c.fir.window}, {"aggregation", aggregation_name(c.fir.aggregation)}}},
              {"retrieval",
               {{"set_size", c.retrieval.set_size},
                {"num_sets", c.retrieval.num_sets},
                {"top_k", c.retrieval.top_k},
                {"seed", c.retrieval.seed}}},
              {"tr_seconds", c.tr_seconds},
              {"detrend_order", c.detrend_order},
              {"seed", c.seed}};
}

json to_json(const ExperimentSetup& s) {
  json alignment;
  if (s.alignment.kind == AlignmentSpec::Kind::Functional) {
    alignment = {{"kind", "functional"}, {"reference", s.alignment.reference}, {"minutes", s.alignment.minutes}};
  } else {
    alignment = {{"kind", "none"}};
  }
  return json{{"train_subjects", s.train_subjects},
              {"test_subject", s.test_subject},
              {"alignment", alignment},
              {"train_minutes", s.train_minutes},
              {"train_repetitions", train_repetition_mode_name(s.train_repetitions)},
              {"test_repetitions", {{"stack", s.test_repetitions.stack}, {"average", s.test_repetitions.average_count}}},
              {"latent_type", s.latent_type},
              {"fir", {{"lag", s.fir.lag}, {"window", s.fir.window}, {"aggregation", aggregation_name(s.fir.aggregation)}}}};
}

namespace {

json provenance(const RunConfig& config) {
  const json cfg = to_json(config);
  return json{{"config_hash", config_hash(cfg)}, {"seed", config.seed}, {"version", kToolVersion}};
}

}  // namespace

json to_json(const SetupResult& r, const RunConfig& config) {
  return json{{"setup", to_json(r.setup)},
              {"report", to_json(r.report)},
              {"train_rows", r.train_rows},
              {"test_rows", r.test_rows},
              {"alignment_frames", r.alignment_frames},
              {"config", to_json(config)},
              {"provenance", provenance(config)}};
}

json to_json(const SweepResult& sweep, const RunConfig& config) {
  json cells = json::array();
  for (const SweepCell& cell : sweep.cells) {
    json jc{{"axis_value", cell.axis_value}, {"setup", to_json(cell.setup)}};
    if (cell.result) {
      jc["report"] = to_json(cell.result->report);
      jc["train_rows"] = cell.result->train_rows;
      jc["alignment_frames"] = cell.result->alignment_frames;
    }
    if (cell.error) jc["error"] = *cell.error;
    cells.push_back(std::move(jc));
  }
  return json{{"axis", sweep.axis},
              {"cells", cells},
              {"spearman_mr", sweep.spearman_mr},
              {"config", to_json(config)},
              {"provenance", provenance(config)}};
}

json to_json(const FirGridResult& grid, const RunConfig& config) {
  json cells = json::array();
  for (const FirCell& cell : grid.cells) {
    json jc{{"lag", cell.spec.lag},
            {"window", cell.spec.window},
            {"aggregation", aggregation_name(cell.spec.aggregation)}};
    if (cell.error) {
      jc["error"] = *cell.error;
    } else {
      jc["cv_mr"] = cell.cv_mr;
    }
    cells.push_back(std::move(jc));
  }
  return json{{"cells", cells},
              {"selected",
               {{"lag", grid.selected.lag},
                {"window", grid.selected.window},
                {"aggregation", aggregation_name(grid.selected.aggregation)},
                {"cv_mr", grid.selected_mr}}},
              {"config", to_json(config)},
              {"provenance", provenance(config)}};
}

json plan_sidecar(const TransportPlan& plan, const PlanDiagnostics& d) {
  json trace = json::array();
  for (const FugwTraceEntry& e : plan.loss_trace) {
    trace.push_back({{"wasserstein", e.raw.wasserstein},
                     {"gromov", e.raw.gromov},
                     {"marginal_kl", e.raw.marginal_kl},
                     {"entropy", e.raw.entropy},
                     {"total", e.raw.total},
                     {"normalized_total", e.normalized_total}});
  }
  json diag{{"mass", d.mass}, {"marginal_l1_out", d.marginal_l1_out}, {"marginal_l1_ref", d.marginal_l1_ref}};
  if (d.diagonal_mass_fraction) diag["diagonal_mass_fraction"] = *d.diagonal_mass_fraction;
  if (d.mean_displacement) diag["mean_displacement"] = *d.mean_displacement;
  return json{{"config", to_json(plan.config)},
              {"cost_scales", {{"wasserstein", plan.scale_wasserstein}, {"gromov", plan.scale_gromov}}},
              // entropy convention recorded with every plan: H(P) = sum P (log P - 1)
              {"entropy_convention", "sum P (log P - 1)"},
              {"loss_trace", trace},
              {"diagnostics", diag},
              {"version", kToolVersion}};
}

std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : dump) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out.good()) throw IoError("write error: " + path.string());
}

void write_retrieval_csv(const RetrievalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "set,mr,topk\n";
  out.precision(17);
  for (std::size_t s = 0; s < report.per_set_mr.size(); ++s) {
    out << s << ',' << report.per_set_mr[s] << ',' << report.per_set_topk[s] << '\n';
  }
  if (!out.good()) throw IoError("write error: " + path.string());
}

}  // namespace braindec
