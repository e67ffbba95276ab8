// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "east/data.hpp"
#include "east/metrics.hpp"
#include "east/model.hpp"
#include "east/trainer.hpp"
#include "east/verify.hpp"

namespace east::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigVersion = "east-config-v1";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + cell + "' as a number in '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list '" + s + "'");
  return out;
}

/// "A..B" inclusive, or a single integer.
std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) return {std::stoull(s)};
  const std::uint64_t a = std::stoull(s.substr(0, dots));
  const std::uint64_t b = std::stoull(s.substr(dots + 2));
  if (b < a) throw UsageError("seed range '" + s + "' is reversed");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t v = a; v <= b; ++v) seeds.push_back(v);
  return seeds;
}

fs::path output_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("EAST_OUT_DIR"); env && *env) return env;
  return "east_out";
}

// ---------------------------------------------------------------------------
// Config document
// ---------------------------------------------------------------------------

struct RunConfig {
  json dataset;  // {"csv": path, "label_column": name} or {"synthetic": {...}}
  train::TrainConfig train;
  std::uint64_t split_seed = 1;
  std::string metric_name = "macro_f_beta";
  std::vector<double> betas;  // empty means all-ones once d is known
};

json train_config_to_json(const RunConfig& rc) {
  return json{{"version", kConfigVersion},
              {"dataset", rc.dataset},
              {"loss", train::to_string(rc.train.loss)},
              {"metric", {{"kind", rc.metric_name}, {"betas", rc.betas}}},
              {"batch_size", rc.train.batch_size},
              {"learning_rate", rc.train.learning_rate},
              {"weight_decay", rc.train.weight_decay},
              {"dropout", rc.train.dropout},
              {"t0", rc.train.t0},
              {"decay_r", rc.train.decay_r},
              {"seed", rc.train.seed},
              {"split_seed", rc.split_seed},
              {"max_epochs_per_phase", rc.train.max_epochs_per_phase},
              {"inner_patience", rc.train.inner_patience},
              {"outer_patience", rc.train.outer_patience},
              {"hidden", rc.train.hidden}};
}

RunConfig parse_run_config(const json& doc) {
  if (doc.value("version", "") != kConfigVersion) {
    throw UsageError("config version must be '" + std::string(kConfigVersion) + "', got '" +
                     doc.value("version", std::string("<missing>")) + "'");
  }
  if (!doc.contains("dataset")) throw UsageError("config: missing 'dataset'");
  RunConfig rc;
  rc.dataset = doc.at("dataset");
  rc.train.loss = train::loss_kind_from_string(doc.value("loss", "east"));
  if (doc.contains("metric")) {
    rc.metric_name = doc.at("metric").value("kind", "macro_f_beta");
    if (doc.at("metric").contains("betas")) {
      rc.betas = doc.at("metric").at("betas").get<std::vector<double>>();
    }
  }
  rc.train.batch_size = doc.value("batch_size", std::size_t{256});
  rc.train.learning_rate = doc.value("learning_rate", 1e-3);
  rc.train.weight_decay = doc.value("weight_decay", 0.0);
  rc.train.dropout = doc.value("dropout", 0.0);
  rc.train.t0 = doc.value("t0", 0.2);
  rc.train.decay_r = doc.value("decay_r", 0.9);
  rc.train.seed = doc.value("seed", std::uint64_t{1});
  rc.split_seed = doc.value("split_seed", std::uint64_t{1});
  rc.train.max_epochs_per_phase = doc.value("max_epochs_per_phase", std::size_t{200});
  rc.train.inner_patience = doc.value("inner_patience", std::size_t{50});
  rc.train.outer_patience = doc.value("outer_patience", std::size_t{3});
  if (doc.contains("hidden")) rc.train.hidden = doc.at("hidden").get<std::vector<std::size_t>>();
  return rc;
}

data::Dataset load_dataset(const json& spec) {
  if (spec.contains("csv")) {
    return data::load_csv(spec.at("csv").get<std::string>(), spec.value("label_column", "label"));
  }
  if (spec.contains("synthetic")) {
    const json& s = spec.at("synthetic");
    return data::gen_synthetic(s.at("d").get<std::size_t>(), s.at("n").get<std::size_t>(),
                               s.at("weights").get<std::vector<double>>(),
                               s.value("separation", 2.0), s.value("seed", std::uint64_t{1}));
  }
  throw UsageError("config: dataset must have 'csv' or 'synthetic'");
}

void finalize_metric(RunConfig& rc, std::size_t d) {
  const metrics::MetricKind kind = metrics::metric_kind_from_string(rc.metric_name);
  if (kind == metrics::MetricKind::kMacroFBeta && rc.betas.empty()) {
    rc.betas.assign(d, 1.0);
  }
  rc.train.metric = metrics::MetricSpec{kind, rc.betas};
  rc.train.metric.validate(d);
}

json hard_metrics_to_json(const train::HardMetrics& hm) {
  return json{{"macro_f1", hm.macro_f1},  {"accuracy", hm.accuracy},
              {"mcc", hm.mcc},            {"macro_f_beta", hm.macro_f_beta},
              {"precision", hm.precision}, {"recall", hm.recall}};
}

json history_to_json(const train::TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"phase", e.phase},
                      {"temperature", e.temperature},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_macro_f1", e.val_macro_f1},
                      {"val_accuracy", e.val_accuracy},
                      {"val_mcc", e.val_mcc}});
  }
  return json{{"epochs", epochs},
              {"phase_end_epochs", h.phase_end_epochs},
              {"stop_reason", h.stop_reason},
              {"best_val_loss", h.best_val_loss},
              {"best_epoch", h.best_epoch},
              {"best_temperature", h.best_temperature},
              {"warnings", h.warnings}};
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    std::uint64_t content_hash, const std::vector<std::string>& outputs) {
  json manifest{{"command", command},
                {"config", config},
                {"content_hash", hash_hex(content_hash)},
                {"outputs", outputs},
                {"timestamp", iso_timestamp()}};
  write_file(dir / "manifest.json", manifest.dump(2));
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::string seeds = "";
  std::string out;
  std::string loss;
  std::string metric;
  std::string betas;
  double t0 = -1.0;
  double decay = -1.0;
};

int cmd_train(const TrainArgs& args) {
  json doc = json::parse(read_file(args.config_path), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw UsageError("config '" + args.config_path + "' is not valid JSON");
  RunConfig rc = parse_run_config(doc);
  if (!args.loss.empty()) rc.train.loss = train::loss_kind_from_string(args.loss);
  if (!args.metric.empty()) rc.metric_name = args.metric;
  if (!args.betas.empty()) rc.betas = parse_csv_doubles(args.betas);
  if (args.t0 > 0.0) rc.train.t0 = args.t0;
  if (args.decay > 0.0) rc.train.decay_r = args.decay;
  std::vector<std::uint64_t> seeds =
      args.seeds.empty() ? std::vector<std::uint64_t>{rc.train.seed} : parse_seed_range(args.seeds);

  data::Dataset full = load_dataset(rc.dataset);
  finalize_metric(rc, full.d);
  rc.train.validate();

  const json config_echo = train_config_to_json(rc);
  std::uint64_t h = fnv1a64(config_echo.dump());
  if (rc.dataset.contains("csv")) h = fnv1a64(read_file(rc.dataset.at("csv")), h);
  const fs::path dir = output_root(args.out) / ("train-" + hash_hex(h));
  fs::create_directories(dir);

  data::SplitDataset splits = data::split(full, rc.split_seed);
  const data::Standardizer standardizer = data::standardize_fit_apply(splits);
  write_file(dir / "standardizer.json",
             json{{"mean", standardizer.mean}, {"stddev", standardizer.stddev}}.dump(2));

  std::vector<std::string> outputs{"standardizer.json"};
  std::vector<double> f1s, accs, mccs;
  for (std::uint64_t seed : seeds) {
    train::TrainConfig cfg = rc.train;
    cfg.seed = seed;
    train::FitResult fr = train::fit(cfg, splits.train, splits.val);
    const train::HardMetrics test = train::evaluate_hard(fr.params, splits.test, rc.betas);
    f1s.push_back(test.macro_f1);
    accs.push_back(test.accuracy);
    mccs.push_back(test.mcc);

    const std::string tag = "seed" + std::to_string(seed);
    model::save_checkpoint(fr.params, (dir / ("model-" + tag + ".json")).string());
    write_file(dir / ("history-" + tag + ".json"), history_to_json(fr.history).dump(2));
    write_file(dir / ("history-" + tag + ".csv"), train::history_to_csv(fr.history));
    write_file(dir / ("metrics-" + tag + ".json"),
               json{{"seed", seed}, {"test", hard_metrics_to_json(test)}}.dump(2));
    for (const char* f : {"model-", "history-", "metrics-"}) outputs.push_back(f + tag + ".json");
    std::cout << "seed " << seed << ": test F1=" << test.macro_f1 << " Acc=" << test.accuracy
              << " MCC=" << test.mcc << "\n";
  }

  json summary{{"seeds", seeds},
               {"test_macro_f1", {{"mean", mean_of(f1s)}, {"std", std_of(f1s)}, {"values", f1s}}},
               {"test_accuracy", {{"mean", mean_of(accs)}, {"std", std_of(accs)}, {"values", accs}}},
               {"test_mcc", {{"mean", mean_of(mccs)}, {"std", std_of(mccs)}, {"values", mccs}}}};
  write_file(dir / "metrics.json", summary.dump(2));
  outputs.push_back("metrics.json");
  write_manifest(dir, "train", config_echo, h, outputs);
  std::cout << "test macro-F1 " << mean_of(f1s) << " +/- " << std_of(f1s) << " over "
            << seeds.size() << " seed(s); outputs in " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model_path;
  std::string data_path;
  std::string label_column = "label";
  std::string standardizer_path;
  std::string metric = "macro_f_beta";
  std::string betas;
  double temperature = 0.2;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  model::MlpParams params = model::load_checkpoint(args.model_path);
  data::Dataset ds = data::load_csv(args.data_path, args.label_column);
  if (!args.standardizer_path.empty()) {
    json s = json::parse(read_file(args.standardizer_path));
    data::Standardizer st;
    st.mean = s.at("mean").get<std::vector<double>>();
    st.stddev = s.at("stddev").get<std::vector<double>>();
    st.apply(ds);
  }
  if (ds.input_dim() != params.input_dim || ds.d > params.d) {
    throw UsageError("checkpoint expects input_dim=" + std::to_string(params.input_dim) + ", d=" +
                     std::to_string(params.d) + "; dataset has input_dim=" +
                     std::to_string(ds.input_dim()) + ", d=" + std::to_string(ds.d));
  }

  std::vector<double> betas =
      args.betas.empty() ? std::vector<double>(params.d, 1.0) : parse_csv_doubles(args.betas);
  const train::HardMetrics hard = train::evaluate_hard(params, ds, betas);

  // Soft diagnostics at the requested temperature.
  Rng rng(0);
  Tensor probs = model::forward(params, ds.features, false, rng);
  Tensor soft = softset::soft_membership_rows(probs, heaviside::Temperature(args.temperature));
  const auto c_soft = softset::confusion_rows(ds.labels, soft.values.data(), ds.size(), ds.d);
  json soft_metrics{{"temperature", args.temperature},
                    {"macro_f_beta", metrics::macro_f_beta(c_soft, betas)},
                    {"accuracy", metrics::accuracy(c_soft)},
                    {"mcc", metrics::mcc(c_soft)}};

  json out{{"hard", hard_metrics_to_json(hard)}, {"soft", soft_metrics},
           {"metric", args.metric}, {"betas", betas}};
  std::cout << out.dump(2) << "\n";
  if (!args.out.empty()) {
    const fs::path dir = output_root(args.out) / "eval";
    write_file(dir / "metrics.json", out.dump(2));
    write_manifest(dir, "eval", json{{"model", args.model_path}, {"data", args.data_path}},
                   fnv1a64(out.dump()), {"metrics.json"});
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

struct GridArgs {
  std::string config_path;
  std::string out;
  std::size_t parallel = 1;
};

int cmd_grid(const GridArgs& args) {
  json doc = json::parse(read_file(args.config_path), nullptr, false);
  if (doc.is_discarded()) throw UsageError("config '" + args.config_path + "' is not valid JSON");
  if (!doc.contains("base") || !doc.contains("grid")) {
    throw UsageError("grid config needs 'base' and 'grid' sections");
  }
  RunConfig rc = parse_run_config(doc.at("base"));
  const json& gj = doc.at("grid");
  train::GridSpec grid;
  grid.batch_sizes = gj.value("batch_sizes", std::vector<std::size_t>{rc.train.batch_size});
  grid.learning_rates = gj.value("learning_rates", std::vector<double>{rc.train.learning_rate});
  grid.dropouts = gj.value("dropouts", std::vector<double>{rc.train.dropout});
  grid.decays = gj.value("decays", std::vector<double>{rc.train.decay_r});
  if (grid.cells() == 0) throw UsageError("grid config produces an empty grid");

  data::Dataset full = load_dataset(rc.dataset);
  finalize_metric(rc, full.d);
  data::SplitDataset splits = data::split(full, rc.split_seed);
  data::standardize_fit_apply(splits);

  const train::GridSearchOutcome outcome =
      train::grid_search(rc.train, grid, splits.train, splits.val, args.parallel);

  std::uint64_t h = fnv1a64(doc.dump());
  const fs::path dir = output_root(args.out) / ("grid-" + hash_hex(h));
  std::ostringstream table;
  table << "rank,cell,batch_size,learning_rate,dropout,decay_r,val_loss\n";
  std::vector<train::GridResult> ranked = outcome.all;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    table << i + 1 << "," << r.cell_index << "," << r.config.batch_size << ","
          << r.config.learning_rate << "," << r.config.dropout << "," << r.config.decay_r << ","
          << r.val_loss << "\n";
  }
  write_file(dir / "results.csv", table.str());

  RunConfig best = rc;
  best.train = outcome.best.config;
  write_file(dir / "best_config.json", train_config_to_json(best).dump(2));
  write_manifest(dir, "grid", doc, h, {"results.csv", "best_config.json"});
  std::cout << table.str() << "best: cell " << outcome.best.cell_index << " val_loss "
            << outcome.best.val_loss << "\noutputs in " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string check = "all";
  std::uint64_t seed = 7;
  std::string out;
  std::size_t n = 500;
  double delta = 0.05;
  std::size_t trials = 2000;
  std::size_t points = 1000;
  std::size_t population = 200000;
};

int cmd_verify(const VerifyArgs& args) {
  static const std::vector<std::string> kAll = {"gt-convergence", "metric-convergence",
                                                "unbiasedness",  "concentration",
                                                "rate",          "tsoi-compat",
                                                "gradcheck"};
  std::vector<std::string> todo;
  if (args.check == "all") {
    todo = kAll;
  } else if (std::find(kAll.begin(), kAll.end(), args.check) != kAll.end()) {
    todo = {args.check};
  } else {
    throw UsageError("unknown check '" + args.check + "'");
  }

  const std::vector<double> t_ladder{0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4};
  std::optional<verify::FrozenSetup> frozen;
  auto get_frozen = [&]() -> verify::FrozenSetup& {
    if (!frozen) frozen = verify::make_frozen_setup(args.population, 3, args.seed);
    return *frozen;
  };

  const fs::path dir = output_root(args.out) / ("verify-seed" + std::to_string(args.seed));
  fs::create_directories(dir);
  bool all_pass = true;
  std::vector<std::string> outputs;
  for (const std::string& name : todo) {
    verify::VerifyReport report;
    if (name == "gt-convergence") {
      report = verify::check_gT_convergence(args.points, 0.05, t_ladder, args.seed);
    } else if (name == "metric-convergence") {
      data::Dataset ds = data::gen_synthetic(3, 2000, std::vector<double>{0.5, 0.3, 0.2}, 2.0,
                                             args.seed);
      model::MlpParams params = model::init(3, 3, 0.0, Rng::derive_seed(args.seed, 5));
      report = verify::check_metric_convergence(ds, params, t_ladder,
                                                metrics::MetricSpec::macro_f1(3));
    } else if (name == "unbiasedness") {
      report = verify::check_unbiasedness(std::min<std::size_t>(args.population, 50000),
                                          {50, 200, 1000, 5000}, 400,
                                          metrics::MetricSpec::macro_f1(3), args.seed);
    } else if (name == "concentration") {
      auto& setup = get_frozen();
      report = verify::check_concentration(setup.population, setup.params, args.n, args.delta,
                                           args.trials, args.seed);
    } else if (name == "rate") {
      auto& setup = get_frozen();
      report = verify::check_rate(setup.population, setup.params,
                                  metrics::MetricSpec::macro_f1(3), {250, 1000, 4000}, 500,
                                  args.seed);
    } else if (name == "tsoi-compat") {
      std::vector<double> grid;
      for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
      report = verify::check_tsoi_compat(grid);
    } else {
      report = verify::check_gradcheck(5, args.seed);
    }
    all_pass = all_pass && report.pass;
    const std::string file = name + ".json";
    write_file(dir / file, report.to_json().dump(2));
    outputs.push_back(file);
    std::cout << (report.pass ? "[PASS] " : "[FAIL] ") << name << "\n";
  }
  write_manifest(dir, "verify",
                 json{{"check", args.check}, {"seed", args.seed}, {"n", args.n},
                      {"delta", args.delta}, {"trials", args.trials}, {"points", args.points},
                      {"population", args.population}},
                 fnv1a64(args.check + std::to_string(args.seed)), outputs);
  return all_pass ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// data
// ---------------------------------------------------------------------------

struct DataArgs {
  std::string gen_out;
  std::size_t d = 2;
  std::size_t n = 1000;
  std::string weights;
  double separation = 2.0;
  std::uint64_t seed = 1;
  std::string inspect_file;
  std::string label_column = "label";
};

int cmd_data_gen(const DataArgs& args) {
  std::vector<double> weights = args.weights.empty()
                                    ? std::vector<double>(args.d, 1.0 / static_cast<double>(args.d))
                                    : parse_csv_doubles(args.weights);
  data::Dataset ds = data::gen_synthetic(args.d, args.n, weights, args.separation, args.seed);
  data::save_csv(ds, args.gen_out);
  json manifest{{"source", "gen-synth"},
                {"path", args.gen_out},
                {"label_column", "label"},
                {"class_mapping", ds.class_names},
                {"d", args.d},
                {"n", args.n},
                {"weights", weights},
                {"separation", args.separation},
                {"seed", args.seed}};
  write_file(fs::path(args.gen_out).concat(".manifest.json"), manifest.dump(2));
  std::cout << "wrote " << args.gen_out << " (" << args.n << " rows, d=" << args.d << ")\n";
  return kExitOk;
}

int cmd_data_inspect(const DataArgs& args) {
  data::Dataset ds = data::load_csv(args.inspect_file, args.label_column);
  const auto counts = ds.class_counts();
  std::cout << "n=" << ds.size() << " input_dim=" << ds.input_dim() << " d=" << ds.d << "\n";
  for (std::size_t k = 0; k < ds.d; ++k) {
    std::cout << "class " << k + 1 << " ('" << ds.class_names[k] << "'): " << counts[k] << "\n";
  }
  std::cout << "shannon_equitability=" << data::shannon_equitability(ds.labels, ds.d) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"EAST: training multiclass classifiers on differentiable "
               "surrogates of confusion-matrix metrics"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier from a config file");
  train_cmd->add_option("--config", train_args.config_path, "JSON config (east-config-v1)")
      ->required();
  train_cmd->add_option("--seed", train_args.seeds, "Seed or A..B range");
  train_cmd->add_option("--seeds", train_args.seeds, "Seed range A..B");
  train_cmd->add_option("--out", train_args.out, "Output directory root");
  train_cmd->add_option("--loss", train_args.loss, "east | ce | dice");
  train_cmd->add_option("--metric", train_args.metric, "macro_f_beta | accuracy | mcc");
  train_cmd->add_option("--betas", train_args.betas, "Per-class beta list, e.g. 1,0.25,1");
  train_cmd->add_option("--temperature-0", train_args.t0, "Initial annealing temperature");
  train_cmd->add_option("--decay", train_args.decay, "Annealing decay rate r");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV dataset");
  eval_cmd->add_option("--model", eval_args.model_path, "Checkpoint JSON")->required();
  eval_cmd->add_option("--data", eval_args.data_path, "CSV dataset")->required();
  eval_cmd->add_option("--label-column", eval_args.label_column, "Label column name");
  eval_cmd->add_option("--standardizer", eval_args.standardizer_path, "standardizer.json");
  eval_cmd->add_option("--metric", eval_args.metric, "Metric to report");
  eval_cmd->add_option("--betas", eval_args.betas, "Per-class beta list");
  eval_cmd->add_option("--temperature", eval_args.temperature, "Soft-metric temperature");
  eval_cmd->add_option("--out", eval_args.out, "Output directory root");

  GridArgs grid_args;
  auto* grid_cmd = app.add_subcommand("grid", "Hyperparameter grid search");
  grid_cmd->add_option("--config", grid_args.config_path, "Grid config JSON")->required();
  grid_cmd->add_option("--out", grid_args.out, "Output directory root");
  grid_cmd->add_option("--parallel", grid_args.parallel, "Concurrent fits");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Numerical verification checks");
  verify_cmd->add_option("check", verify_args.check,
                         "gt-convergence | metric-convergence | unbiasedness | concentration | "
                         "rate | tsoi-compat | gradcheck | all");
  verify_cmd->add_option("--seed", verify_args.seed, "RNG seed");
  verify_cmd->add_option("--out", verify_args.out, "Output directory root");
  verify_cmd->add_option("--n", verify_args.n, "Resample size (concentration)");
  verify_cmd->add_option("--delta", verify_args.delta, "Failure probability (concentration)");
  verify_cmd->add_option("--trials", verify_args.trials, "Resample count");
  verify_cmd->add_option("--points", verify_args.points, "Simplex points (gt-convergence)");
  verify_cmd->add_option("--population", verify_args.population, "Frozen population size");

  DataArgs data_args;
  auto* data_cmd = app.add_subcommand("data", "Dataset utilities");
  auto* gen_cmd = data_cmd->add_subcommand("gen-synth", "Write a synthetic CSV dataset");
  gen_cmd->add_option("--out-file", data_args.gen_out, "CSV output path")->required();
  gen_cmd->add_option("--d", data_args.d, "Class count");
  gen_cmd->add_option("--n", data_args.n, "Example count");
  gen_cmd->add_option("--weights", data_args.weights, "Class weights, e.g. 0.95,0.05");
  gen_cmd->add_option("--separation", data_args.separation, "Cluster separation");
  gen_cmd->add_option("--seed", data_args.seed, "RNG seed");
  auto* inspect_cmd = data_cmd->add_subcommand("inspect", "Print dataset statistics");
  inspect_cmd->add_option("--file", data_args.inspect_file, "CSV path")->required();
  inspect_cmd->add_option("--label-column", data_args.label_column, "Label column name");
  data_cmd->require_subcommand(1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*grid_cmd) return cmd_grid(grid_args);
    if (*verify_cmd) return cmd_verify(verify_args);
    if (*gen_cmd) return cmd_data_gen(data_args);
    if (*inspect_cmd) return cmd_data_inspect(data_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace east::cli
