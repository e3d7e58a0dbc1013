#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "braindec/geometry.hpp"

namespace braindec {

struct RunRef {
  std::string id;
  std::string split;  // "train" or "test"
  Index rows = 0;
  std::filesystem::path features;  // relative to the manifest directory
};

struct SubjectRecord {
  std::string id;
  std::filesystem::path distances_file;
  std::filesystem::path weights_file;
  std::optional<GridShape> grid;
  std::vector<RunRef> runs;

  std::vector<RunRef> runs_for_split(const std::string& split) const;
};

// Dataset layout shared by the generator, the CLI and any external
// converter: per-subject feature runs, shared latent files keyed by run id,
// and repetition groups naming runs that showed identical stimuli.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SubjectRecord> subjects;
  std::map<std::string, std::map<std::string, std::filesystem::path>> latents;  // type -> run id -> file
  std::vector<std::vector<std::string>> repetition_groups;

  const SubjectRecord& subject(const std::string& id) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : root / p; }
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads every referenced file, checking row declarations, geometry
/// invariants and equal row counts inside each repetition group.
void validate_manifest(const DatasetManifest& manifest);

}  // namespace braindec
