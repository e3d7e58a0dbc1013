#include "braindec/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "braindec/errors.hpp"

namespace braindec {

using nlohmann::json;

int RunConfig::detrend_order_for(Index run_rows) const {
  if (detrend_order > 0) return std::min<Index>(detrend_order, run_rows - 1);
  return default_detrend_order(run_rows, tr_seconds);
}

int RunConfig::minutes_to_frames(double minutes) const {
  if (!(minutes > 0.0)) throw ValidationError("minutes_to_frames: minutes must be positive");
  const auto frames = static_cast<int>(std::llround(minutes * 60.0 / tr_seconds));
  if (frames < 1) throw ValidationError("minutes_to_frames: fewer than one frame at TR " + std::to_string(tr_seconds));
  return frames;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }

  RunConfig c;
  try {
    if (j.contains("fugw")) {
      const json& f = j["fugw"];
      c.fugw.alpha = f.value("alpha", c.fugw.alpha);
      c.fugw.rho = f.value("rho", c.fugw.rho);
      c.fugw.epsilon = f.value("epsilon", c.fugw.epsilon);
      c.fugw.bcd_iters = f.value("bcd_iters", c.fugw.bcd_iters);
      c.fugw.sinkhorn_iters = f.value("sinkhorn_iters", c.fugw.sinkhorn_iters);
      c.fugw.normalize_costs = f.value("normalize_costs", c.fugw.normalize_costs);
    }
    if (j.contains("ridge")) c.alpha_ridge = j["ridge"].value("alpha_ridge", c.alpha_ridge);
    if (j.contains("fir")) {
      const json& f = j["fir"];
      c.fir.lag = f.value("lag", c.fir.lag);
      c.fir.window = f.value("window", c.fir.window);
      if (f.contains("aggregation")) c.fir.aggregation = parse_aggregation(f["aggregation"].get<std::string>());
    }
    if (j.contains("retrieval")) {
      const json& r = j["retrieval"];
      c.retrieval.set_size = r.value("set_size", c.retrieval.set_size);
      c.retrieval.num_sets = r.value("num_sets", c.retrieval.num_sets);
      c.retrieval.top_k = r.value("top_k", c.retrieval.top_k);
      c.retrieval.seed = r.value("seed", c.retrieval.seed);
    }
    c.tr_seconds = j.value("tr_seconds", c.tr_seconds);
    c.detrend_order = j.value("detrend_order", c.detrend_order);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  validate_run_config(c);
  return c;
}

void save_run_config(const RunConfig& c, const std::filesystem::path& path) {
  const json j{
      {"fugw",
       {{"alpha", c.fugw.alpha},
        {"rho", c.fugw.rho},
        {"epsilon", c.fugw.epsilon},
        {"bcd_iters", c.fugw.bcd_iters},
        {"sinkhorn_iters", c.fugw.sinkhorn_iters},
        {"normalize_costs", c.fugw.normalize_costs}}},
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

  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << j.dump(2) << '\n';
}

void validate_run_config(const RunConfig& c) {
  if (!(c.fugw.alpha >= 0.0 && c.fugw.alpha <= 1.0)) throw ValidationError("config: fugw.alpha must lie in [0,1]");
  if (!(c.fugw.rho > 0.0)) throw ValidationError("config: fugw.rho must be positive");
  if (!(c.fugw.epsilon > 0.0)) throw ValidationError("config: fugw.epsilon must be positive");
  if (c.fugw.bcd_iters < 1 || c.fugw.sinkhorn_iters < 1) throw ValidationError("config: iteration counts must be >= 1");
  if (c.alpha_ridge < 0.0) throw ValidationError("config: ridge.alpha_ridge must be >= 0");
  if (c.fir.lag < 0) throw ValidationError("config: fir.lag must be >= 0");
  if (c.fir.window < 1) throw ValidationError("config: fir.window must be >= 1");
  if (c.retrieval.set_size < 1 || c.retrieval.num_sets < 1 || c.retrieval.top_k < 1) {
    throw ValidationError("config: retrieval parameters must be positive");
  }
  if (!(c.tr_seconds > 0.0)) throw ValidationError("config: tr_seconds must be positive");
  if (c.detrend_order < 0) throw ValidationError("config: detrend_order must be >= 0");
}

}  // namespace braindec
