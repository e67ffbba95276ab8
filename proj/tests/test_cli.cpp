// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "east/data.hpp"
#include "east/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::initializer_list<std::string> args) {
  return east::cli::run(std::vector<std::string>(args));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

json tiny_train_config(std::size_t n, std::uint64_t seed) {
  return json{{"version", "east-config-v1"},
              {"dataset",
               {{"synthetic",
                 {{"d", 2}, {"n", n}, {"weights", {0.5, 0.5}}, {"separation", 4.0}, {"seed", 3}}}}},
              {"loss", "east"},
              {"metric", {{"kind", "macro_f_beta"}}},
              {"batch_size", 64},
              {"learning_rate", 0.003},
              {"seed", seed},
              {"max_epochs_per_phase", 4},
              {"inner_patience", 1},
              {"outer_patience", 1},
              {"hidden", {12, 8}}};
}

fs::path find_run_dir(const fs::path& root, const std::string& prefix) {
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.path().filename().string().rfind(prefix, 0) == 0) return entry.path();
  }
  return {};
}

}  // namespace

TEST_CASE("data gen-synth writes a loadable csv with a manifest") {
  TempDir dir("east_cli_gen");
  const std::string csv = dir.str("synth.csv");
  CHECK(run({"data", "gen-synth", "--out-file", csv, "--d", "2", "--n", "400", "--weights",
             "0.5,0.5", "--seed", "9"}) == 0);
  const auto ds = east::data::load_csv(csv, "label");
  CHECK(ds.size() == 400);
  CHECK(east::data::shannon_equitability(ds.labels, 2) > 0.99);
  CHECK(fs::exists(csv + ".manifest.json"));

  CHECK(run({"data", "inspect", "--file", csv}) == 0);
}

TEST_CASE("gen-synth reproduces a target imbalance") {
  TempDir dir("east_cli_imb");
  const std::string csv = dir.str("mammo.csv");
  CHECK(run({"data", "gen-synth", "--out-file", csv, "--d", "2", "--n", "6000", "--weights",
             "0.9767,0.0233", "--seed", "5"}) == 0);
  const auto ds = east::data::load_csv(csv, "label");
  double pos = 0;
  for (int y : ds.labels) pos += y == 2 ? 1 : 0;
  const double frac = pos / static_cast<double>(ds.size());
  CHECK(frac > 0.015);
  CHECK(frac < 0.032);
}

TEST_CASE("invalid weights exit with a usage error") {
  TempDir dir("east_cli_badw");
  CHECK(run({"data", "gen-synth", "--out-file", dir.str("x.csv"), "--d", "2", "--weights",
             "0.7,0.7"}) == 2);
}

TEST_CASE("train writes checkpoint, history, metrics and manifest") {
  TempDir dir("east_cli_train");
  const fs::path cfg = dir.path / "cfg.json";
  write(cfg, tiny_train_config(300, 1).dump());
  CHECK(run({"train", "--config", cfg.string(), "--out", dir.str("out")}) == 0);

  const fs::path run_dir = find_run_dir(dir.path / "out", "train-");
  REQUIRE(!run_dir.empty());
  CHECK(fs::exists(run_dir / "model-seed1.json"));
  CHECK(fs::exists(run_dir / "history-seed1.json"));
  CHECK(fs::exists(run_dir / "history-seed1.csv"));
  CHECK(fs::exists(run_dir / "metrics-seed1.json"));
  CHECK(fs::exists(run_dir / "metrics.json"));
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "standardizer.json"));

  const json manifest = json::parse(std::ifstream(run_dir / "manifest.json"));
  CHECK(manifest.at("command") == "train");
  CHECK(manifest.at("config").at("version") == "east-config-v1");

  // The checkpoint loads back.
  const auto params = east::model::load_checkpoint((run_dir / "model-seed1.json").string());
  CHECK(params.d == 2);
}

TEST_CASE("multi-seed training aggregates mean and std") {
  TempDir dir("east_cli_seeds");
  const fs::path cfg = dir.path / "cfg.json";
  write(cfg, tiny_train_config(300, 1).dump());
  CHECK(run({"train", "--config", cfg.string(), "--seeds", "1..3", "--out", dir.str("out")}) == 0);
  const fs::path run_dir = find_run_dir(dir.path / "out", "train-");
  const json summary = json::parse(std::ifstream(run_dir / "metrics.json"));
  CHECK(summary.at("test_macro_f1").at("values").size() == 3);
  CHECK(summary.at("test_macro_f1").contains("mean"));
  CHECK(summary.at("test_macro_f1").contains("std"));
}

TEST_CASE("config and input errors exit 2") {
  TempDir dir("east_cli_err");
  CHECK(run({"train", "--config", dir.str("missing.json")}) == 2);

  const fs::path bad_version = dir.path / "bad.json";
  write(bad_version, json{{"version", "v999"}, {"dataset", json::object()}}.dump());
  CHECK(run({"train", "--config", bad_version.string()}) == 2);

  json cfg = tiny_train_config(300, 1);
  cfg["dataset"] = {{"csv", dir.str("absent.csv")}, {"label_column", "label"}};
  const fs::path missing_data = dir.path / "cfg.json";
  write(missing_data, cfg.dump());
  CHECK(run({"train", "--config", missing_data.string()}) == 2);

  CHECK(run({"verify", "definitely-not-a-check"}) == 2);
  CHECK(run({"no-such-command"}) == 2);
}

TEST_CASE("eval reports perfect accuracy for a hand-built separator") {
  TempDir dir("east_cli_eval");
  // Classifier: logits ~ (relu(x1-x2) - relu(x2-x1)) in class-1 coordinate.
  east::model::MlpParams p = east::model::init_custom(2, {2}, 2, 0.0, 1);
  p.weights[0].values = {1.0, -1.0, -1.0, 1.0};  // h = [x1-x2, x2-x1]
  p.biases[0].values = {0.0, 0.0};
  p.weights[1].values = {5.0, -5.0, -5.0, 5.0};
  p.biases[1].values = {0.0, 0.0};
  const std::string model_path = dir.str("sep.json");
  east::model::save_checkpoint(p, model_path);

  std::ostringstream csv;
  csv << "x1,x2,label\n";
  east::Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    const double a = rng.uniform(-2.0, 2.0);
    const double delta = (i % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
    csv << a + delta << "," << a << "," << (delta > 0 ? "one" : "two") << "\n";
  }
  const std::string data_path = dir.str("sep.csv");
  write(data_path, csv.str());

  CHECK(run({"eval", "--model", model_path, "--data", data_path, "--out", dir.str("out")}) == 0);
  const json metrics = json::parse(std::ifstream(dir.path / "out" / "eval" / "metrics.json"));
  CHECK(metrics.at("hard").at("accuracy").get<double>() == doctest::Approx(1.0));
  CHECK(metrics.at("soft").contains("macro_f_beta"));

  // Idempotent re-run.
  const std::string before = json::parse(std::ifstream(dir.path / "out/eval/metrics.json")).dump();
  CHECK(run({"eval", "--model", model_path, "--data", data_path, "--out", dir.str("out")}) == 0);
  const std::string after = json::parse(std::ifstream(dir.path / "out/eval/metrics.json")).dump();
  CHECK(before == after);

  // Width mismatch exits 2.
  std::ostringstream bad;
  bad << "x1,x2,x3,label\n1,2,3,one\n2,1,0,two\n";
  write(dir.path / "bad.csv", bad.str());
  CHECK(run({"eval", "--model", model_path, "--data", dir.str("bad.csv")}) == 2);
}

TEST_CASE("grid search ranks cells and honors --parallel") {
  TempDir dir("east_cli_grid");
  json cfg{{"base", tiny_train_config(300, 1)},
           {"grid",
            {{"batch_sizes", {64}}, {"learning_rates", {0.003, 1e-9}}, {"dropouts", {0.0}},
             {"decays", {0.9}}}}};
  const fs::path cfg_path = dir.path / "grid.json";
  write(cfg_path, cfg.dump());

  CHECK(run({"grid", "--config", cfg_path.string(), "--out", dir.str("a")}) == 0);
  const fs::path dir_a = find_run_dir(dir.path / "a", "grid-");
  REQUIRE(!dir_a.empty());
  std::ifstream results(dir_a / "results.csv");
  std::string line;
  int rows = 0;
  while (std::getline(results, line)) ++rows;
  CHECK(rows == 3);  // header + 2 cells
  const json best_a = json::parse(std::ifstream(dir_a / "best_config.json"));

  CHECK(run({"grid", "--config", cfg_path.string(), "--out", dir.str("b"), "--parallel", "2"}) ==
        0);
  const fs::path dir_b = find_run_dir(dir.path / "b", "grid-");
  const json best_b = json::parse(std::ifstream(dir_b / "best_config.json"));
  CHECK(best_a.dump() == best_b.dump());

  json empty = cfg;
  empty["grid"]["learning_rates"] = json::array();
  write(dir.path / "empty.json", empty.dump());
  CHECK(run({"grid", "--config", dir.str("empty.json")}) == 2);
}

TEST_CASE("verify subcommand writes reports and exits by pass state") {
  TempDir dir("east_cli_verify");
  CHECK(run({"verify", "tsoi-compat", "--out", dir.str("out")}) == 0);
  const fs::path run_dir = find_run_dir(dir.path / "out", "verify-");
  REQUIRE(!run_dir.empty());
  const json report = json::parse(std::ifstream(run_dir / "tsoi-compat.json"));
  CHECK(report.at("pass").get<bool>());
  CHECK(fs::exists(run_dir / "manifest.json"));
}

TEST_CASE("gradcheck through the cli") {
  TempDir dir("east_cli_gradcheck");
  CHECK(run({"verify", "gradcheck", "--seed", "7", "--out", dir.str("out")}) == 0);
  const fs::path run_dir = find_run_dir(dir.path / "out", "verify-");
  const json report = json::parse(std::ifstream(run_dir / "gradcheck.json"));
  CHECK(report.at("stats").at("max_rel_error").get<double>() < 1e-4);
}
