#include "braindec/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "braindec/errors.hpp"
#include "braindec/matrix_io.hpp"

namespace braindec {

using nlohmann::json;

std::vector<RunRef> SubjectRecord::runs_for_split(const std::string& split) const {
  std::vector<RunRef> out;
  for (const RunRef& r : runs) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

const SubjectRecord& DatasetManifest::subject(const std::string& id) const {
  for (const SubjectRecord& s : subjects) {
    if (s.id == id) return s;
  }
  throw ValidationError("manifest: unknown subject '" + id + "'");
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

GridShape grid_from_json(const json& j) {
  GridShape g;
  g.width = j.at("width").get<int>();
  g.height = j.at("height").get<int>();
  g.spacing = j.value("spacing", 1.0);
  return g;
}

json grid_to_json(const GridShape& g) {
  return json{{"width", g.width}, {"height", g.height}, {"spacing", g.spacing}};
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  DatasetManifest m;
  m.root = path.parent_path();

  try {
    for (const json& js : j.at("subjects")) {
      SubjectRecord rec;
      rec.id = js.at("id").get<std::string>();
      const json& geom = js.at("geometry");
      rec.distances_file = geom.at("distances").get<std::string>();
      rec.weights_file = geom.at("weights").get<std::string>();
      if (geom.contains("grid")) rec.grid = grid_from_json(geom.at("grid"));
      for (const json& jr : js.at("runs")) {
        RunRef run;
        run.id = jr.at("id").get<std::string>();
        run.split = jr.at("split").get<std::string>();
        run.rows = jr.at("rows").get<Index>();
        run.features = jr.at("features").get<std::string>();
        rec.runs.push_back(std::move(run));
      }
      m.subjects.push_back(std::move(rec));
    }
    for (const auto& [latent_type, files] : j.at("latents").items()) {
      for (const auto& [run_id, file] : files.items()) {
        m.latents[latent_type][run_id] = file.get<std::string>();
      }
    }
    if (j.contains("repetition_groups")) {
      for (const json& group : j.at("repetition_groups")) {
        m.repetition_groups.push_back(group.get<std::vector<std::string>>());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json subjects = json::array();
  for (const SubjectRecord& s : manifest.subjects) {
    json runs = json::array();
    for (const RunRef& r : s.runs) {
      runs.push_back({{"id", r.id}, {"split", r.split}, {"rows", r.rows}, {"features", r.features.string()}});
    }
    json geom{{"distances", s.distances_file.string()}, {"weights", s.weights_file.string()}};
    if (s.grid) geom["grid"] = grid_to_json(*s.grid);
    subjects.push_back({{"id", s.id}, {"geometry", geom}, {"runs", runs}});
  }
  json latents = json::object();
  for (const auto& [latent_type, files] : manifest.latents) {
    json per_run = json::object();
    for (const auto& [run_id, file] : files) per_run[run_id] = file.string();
    latents[latent_type] = per_run;
  }
  const json j{{"subjects", subjects}, {"latents", latents}, {"repetition_groups", manifest.repetition_groups}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void validate_manifest(const DatasetManifest& m) {
  if (m.subjects.empty()) throw ValidationError("manifest: no subjects");

  std::set<std::string> run_ids;
  for (const SubjectRecord& s : m.subjects) {
    Geometry g;
    g.distances = read_matrix_f64(m.resolve(s.distances_file));
    const Matrix w = read_matrix_f64(m.resolve(s.weights_file));
    g.weights = w.reshaped();
    g.grid = s.grid;
    validate_geometry(g);

    for (const RunRef& r : s.runs) {
      run_ids.insert(r.id);
      if (r.split != "train" && r.split != "test") {
        throw ValidationError("manifest: run '" + r.id + "' has unknown split '" + r.split + "'");
      }
      const Matrix features = read_matrix_f64(m.resolve(r.features));
      if (features.rows() != r.rows) {
        throw ValidationError("manifest: run '" + r.id + "' of subject '" + s.id + "' declares " +
                              std::to_string(r.rows) + " rows but the file has " +
                              std::to_string(features.rows()));
      }
      if (features.cols() != g.weights.size()) {
        throw ValidationError("manifest: run '" + r.id + "' of subject '" + s.id +
                              "' does not match the subject geometry");
      }
    }
  }

  for (const auto& [latent_type, files] : m.latents) {
    for (const auto& [run_id, file] : files) {
      if (!run_ids.contains(run_id)) {
        throw ValidationError("manifest: latents '" + latent_type + "' reference unknown run '" + run_id + "'");
      }
      (void)read_matrix_f64(m.resolve(file));
    }
  }

  for (const auto& group : m.repetition_groups) {
    Index rows = -1;
    for (const std::string& run_id : group) {
      if (!run_ids.contains(run_id)) {
        throw ValidationError("manifest: repetition group references unknown run '" + run_id + "'");
      }
      for (const SubjectRecord& s : m.subjects) {
        for (const RunRef& r : s.runs) {
          if (r.id != run_id) continue;
          if (rows < 0) rows = r.rows;
          if (r.rows != rows) {
            throw ValidationError("manifest: repetition group containing '" + run_id +
                                  "' mixes runs of different lengths");
          }
        }
      }
    }
  }
}

}  // namespace braindec
