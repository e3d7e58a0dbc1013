// End-to-end smoke tests driving the installed CLI binary.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "braindec/matrix_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = BRAINDEC_CLI_PATH;

fs::path workspace() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "braindec_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("cli pipeline: simulate, align, transport, decode, evaluate, sweep, gridsearch, visuals") {
  const fs::path work = workspace();

  write_text(work / "synth.json", R"({
    "grid": {"width": 5, "height": 5, "spacing": 1.0},
    "n_train": 160, "n_test": 120, "latent_dim": 6,
    "smoothness": 2.0, "snr": 4.0, "seed": 21,
    "subjects": [
      {"id": "ref", "permutation": "identity"},
      {"id": "rot", "permutation": "rotation180"}
    ]
  })");
  write_text(work / "config.json", R"({
    "fugw": {"sinkhorn_iters": 150, "bcd_iters": 3},
    "ridge": {"alpha_ridge": 100.0},
    "fir": {"lag": 0, "window": 1, "aggregation": "average"},
    "retrieval": {"set_size": 80, "num_sets": 5, "seed": 4},
    "seed": 9
  })");
  write_text(work / "setup_within.json", R"({
    "train_subjects": ["ref"],
    "test_subject": "ref",
    "fir": {"lag": 0, "window": 1, "aggregation": "average"}
  })");
  write_text(work / "setup_aligned.json", R"({
    "train_subjects": ["ref"],
    "test_subject": "rot",
    "alignment": {"kind": "functional", "reference": "ref"},
    "fir": {"lag": 0, "window": 1, "aggregation": "average"}
  })");

  const std::string cfg = " --config " + (work / "config.json").string();

  REQUIRE(run("simulate --spec " + (work / "synth.json").string() + " --out " + (work / "data").string()) == 0);
  CHECK(fs::exists(work / "data/manifest.json"));
  CHECK(fs::exists(work / "data/ground_truth.json"));

  const std::string manifest = (work / "data/manifest.json").string();

  SUBCASE("align writes a plan and sidecar; downstream consumers work") {
    REQUIRE(run(cfg + " align --manifest " + manifest + " --subject rot --reference ref --out " +
                (work / "plan").string()) == 0);
    const braindec::Matrix plan = braindec::read_matrix_f64(work / "plan/plan.fmat");
    CHECK(plan.rows() == 25);
    CHECK(plan.cols() == 25);
    const json sidecar = read_json(work / "plan/plan.json");
    CHECK(sidecar.at("subject") == "rot");
    CHECK(sidecar.at("loss_trace").size() == 4);  // init + 3 BCD iterations
    CHECK(sidecar.at("diagnostics").contains("mass"));

    REQUIRE(run("transport --plan " + (work / "plan/plan.fmat").string() + " --input " +
                (work / "data/rot_test-0.fmat").string() + " --output moved.fmat --out " +
                (work / "plan").string()) == 0);
    const braindec::Matrix moved = braindec::read_matrix_f64(work / "plan/moved.fmat");
    CHECK(moved.rows() == 120);
    CHECK(moved.cols() == 25);

    REQUIRE(run("export-visual --plan " + (work / "plan/plan.fmat").string() + " --manifest " + manifest +
                " --reference ref --out " + (work / "visual").string()) == 0);
    CHECK(fs::exists(work / "visual/transported_colormap.csv"));
    std::ifstream ppm(work / "visual/transported_colormap.ppm", std::ios::binary);
    std::string magic;
    int width = 0;
    int height = 0;
    int maxval = 0;
    ppm >> magic >> width >> height >> maxval;
    CHECK(magic == "P6");
    CHECK(width == 5);
    CHECK(height == 5);
    CHECK(maxval == 255);
  }

  SUBCASE("decode trains and serializes a model") {
    REQUIRE(run(cfg + " decode --manifest " + manifest + " --setup " + (work / "setup_within.json").string() +
                " --out " + (work / "model").string()) == 0);
    const braindec::Matrix weights = braindec::read_matrix_f64(work / "model/weights.fmat");
    CHECK(weights.rows() == 25);
    CHECK(weights.cols() == 6);
    const json meta = read_json(work / "model/decoder.json");
    CHECK(meta.at("training_meta").at("subjects")[0] == "ref");
    CHECK(read_json(work / "model/report.json").contains("report"));
  }

  SUBCASE("evaluate on a perfect prediction file reports MR 0") {
    REQUIRE(run(cfg + " evaluate --preds " + (work / "data/latents_test.fmat").string() + " --truths " +
                (work / "data/latents_test.fmat").string() + " --out " + (work / "eval").string()) == 0);
    const json report = read_json(work / "eval/retrieval.json");
    CHECK(report.at("median_relative_rank") == 0.0);
    CHECK(report.at("topk_accuracy") == 100.0);
    CHECK(fs::exists(work / "eval/retrieval.csv"));
  }

  SUBCASE("run-setup with alignment emits a full report") {
    REQUIRE(run(cfg + " run-setup --manifest " + manifest + " --setup " + (work / "setup_aligned.json").string() +
                " --out " + (work / "run").string()) == 0);
    const json report = read_json(work / "run/report.json");
    CHECK(report.at("setup").at("alignment").at("kind") == "functional");
    CHECK(report.at("report").at("per_set_mr").size() == 5);
    CHECK(report.at("provenance").contains("config_hash"));
    // Aligned decoding on this easy pair must be far from chance.
    CHECK(report.at("report").at("median_relative_rank").get<double>() < 20.0);
  }

  SUBCASE("sweep over test repetitions writes cells in grid order") {
    REQUIRE(run(cfg + " sweep --manifest " + manifest + " --setup " + (work / "setup_within.json").string() +
                " --axis test-repetitions --grid 1 --out " + (work / "sweep").string()) == 0);
    const json sweep = read_json(work / "sweep/sweep.json");
    CHECK(sweep.at("axis") == "test_repetitions");
    CHECK(sweep.at("cells").size() == 1);
    CHECK(sweep.at("cells")[0].contains("report"));
  }

  SUBCASE("gridsearch-fir selects a cell and reports the grid") {
    REQUIRE(run(cfg + " gridsearch-fir --manifest " + manifest + " --lags 0:1 --windows 1 " +
                "--aggregations average --folds 3 --out " + (work / "grid").string()) == 0);
    const json grid = read_json(work / "grid/gridsearch.json");
    CHECK(grid.at("cells").size() == 2);
    CHECK(grid.at("selected").at("lag") == 0);  // data has no injected lag
  }

  SUBCASE("validation failures exit with code 2") {
    CHECK(run("run-setup --manifest /nonexistent/manifest.json --setup " +
              (work / "setup_within.json").string()) == 2);
    CHECK(run("simulate --spec /nonexistent/spec.json --out " + (work / "x").string()) == 2);
    // Reference subject missing from the manifest.
    write_text(work / "setup_bad.json", R"({
      "train_subjects": ["ref"],
      "test_subject": "rot",
      "alignment": {"kind": "functional", "reference": "nope"}
    })");
    CHECK(run(cfg + " run-setup --manifest " + manifest + " --setup " + (work / "setup_bad.json").string() +
              " --out " + (work / "bad").string()) == 2);
  }
}
