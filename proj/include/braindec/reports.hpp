#pragma once

#include <filesystem>

#include <json.hpp>

#include "braindec/config.hpp"
#include "braindec/experiment.hpp"
#include "braindec/fugw.hpp"

namespace braindec {

// JSON views of results. Reports embed the fully resolved config and all
// seeds; no timestamps, so reruns with the same inputs are byte-identical.
nlohmann::json to_json(const RetrievalReport& report);
nlohmann::json to_json(const FugwConfig& config);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const ExperimentSetup& setup);
nlohmann::json to_json(const SetupResult& result, const RunConfig& config);
nlohmann::json to_json(const SweepResult& sweep, const RunConfig& config);
nlohmann::json to_json(const FirGridResult& grid, const RunConfig& config);
nlohmann::json plan_sidecar(const TransportPlan& plan, const PlanDiagnostics& diagnostics);

/// Stable FNV-1a hash of a canonical JSON dump, reported as provenance.
std::string config_hash(const nlohmann::json& j);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
void write_retrieval_csv(const RetrievalReport& report, const std::filesystem::path& path);

extern const char* const kToolVersion;

}  // namespace braindec
