// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "east/softset.hpp"

namespace east::train {

namespace {

constexpr double kTempFloor = 1e-12;
constexpr double kTempCeil = 0.4;

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  const std::size_t dim = x.cols();
  Tensor out = Tensor::zeros({idx.size(), dim});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* src = x.values.data() + idx[r] * dim;
    std::copy(src, src + dim, out.values.data() + r * dim);
  }
  return out;
}

// One-hot label matrix transposed (d x n), the constant factor that turns a
// batch of membership rows into a confusion matrix.
Tensor labels_transposed_onehot(std::span<const int> labels, std::size_t d) {
  Tensor lt = Tensor::zeros({d, labels.size()});
  for (std::size_t e = 0; e < labels.size(); ++e) {
    lt.at(static_cast<std::size_t>(labels[e] - 1), e) = 1.0;
  }
  return lt;
}

std::vector<double> collect_gradients(const diff::Graph& g, const model::ParamNodes& nodes) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < nodes.weights.size(); ++l) {
    const Tensor& gw = g.grad(nodes.weights[l]);
    flat.insert(flat.end(), gw.values.begin(), gw.values.end());
    const Tensor& gb = g.grad(nodes.biases[l]);
    flat.insert(flat.end(), gb.values.begin(), gb.values.end());
  }
  return flat;
}

}  // namespace

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "east") return LossKind::kEast;
  if (name == "ce" || name == "cross_entropy") return LossKind::kCrossEntropy;
  if (name == "dice") return LossKind::kDice;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kEast:
      return "east";
    case LossKind::kCrossEntropy:
      return "ce";
    case LossKind::kDice:
      return "dice";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (!(t0 > 0.0 && t0 <= kTempCeil)) {
    throw std::invalid_argument("TrainConfig: t0 " + std::to_string(t0) + " outside (0, 0.4]");
  }
  if (!(decay_r > 0.0 && decay_r < 1.0)) {
    throw std::invalid_argument("TrainConfig: decay_r " + std::to_string(decay_r) +
                                " outside (0, 1)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("TrainConfig: dropout outside [0, 1)");
  }
  if (max_epochs_per_phase == 0) {
    throw std::invalid_argument("TrainConfig: max_epochs_per_phase must be positive");
  }
}

heaviside::Temperature anneal_temperature(const AnnealState& state) {
  const double t = state.t0 * std::pow(state.r, static_cast<double>(state.k));
  return heaviside::Temperature(std::clamp(t, kTempFloor, kTempCeil));
}

std::string history_to_csv(const TrainHistory& history) {
  std::ostringstream os;
  os.precision(12);
  os << "epoch,phase,temperature,train_loss,val_loss,val_macro_f1,val_accuracy,val_mcc\n";
  for (const auto& e : history.epochs) {
    os << e.epoch << "," << e.phase << "," << e.temperature << "," << e.train_loss << ","
       << e.val_loss << "," << e.val_macro_f1 << "," << e.val_accuracy << "," << e.val_mcc << "\n";
  }
  return os.str();
}

void adamw_step(std::vector<double>& params, const std::vector<double>& grads, AdamWState& state,
                double lr, double weight_decay, double beta1, double beta2, double eps) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adamw_step: " + std::to_string(grads.size()) + " gradients for " +
                                std::to_string(params.size()) + " parameters");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr * weight_decay * params[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

double train_epoch(model::MlpParams& params, const TrainConfig& config, heaviside::Temperature t,
                   const data::Dataset& trainset, Rng& rng, AdamWState& opt) {
  const std::size_t n = trainset.size();
  if (n == 0) throw std::invalid_argument("train_epoch: empty training set");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng.uniform_index(i + 1)]);

  std::vector<double> flat = model::flatten_parameters(params);
  double loss_sum = 0.0;
  std::size_t batches = 0;

  for (std::size_t start = 0; start < n; start += config.batch_size) {
    const std::size_t stop = std::min(start + config.batch_size, n);
    std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
    Tensor xb = gather_rows(trainset.features, idx);
    std::vector<int> yb(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) yb[r] = trainset.labels[idx[r]];

    diff::Graph g;
    model::ParamNodes nodes = model::make_param_nodes(g, params);
    std::vector<Tensor> masks =
        config.dropout > 0.0 ? model::sample_dropout_masks(params, idx.size(), rng)
                             : std::vector<Tensor>{};
    diff::Value probs = model::forward_graph(g, nodes, xb, masks);

    diff::Value loss;
    switch (config.loss) {
      case LossKind::kEast: {
        diff::Value yhat = g.l1_normalize_rows(g.heaviside_pl(probs, t, config.detach_tau));
        diff::Value confusion =
            g.matmul(g.constant(labels_transposed_onehot(yb, trainset.d)), yhat);
        loss = metrics::surrogate_loss(g, config.metric, confusion, trainset.d);
        break;
      }
      case LossKind::kCrossEntropy:
        loss = metrics::cross_entropy_loss(g, probs, yb);
        break;
      case LossKind::kDice:
        loss = metrics::dice_loss_graph(g, probs, yb);
        break;
    }

    const double loss_value = g.value(loss).values[0];
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("train_epoch: non-finite loss at batch " + std::to_string(batches) +
                               ", T=" + std::to_string(t.value()));
    }
    g.backward(loss);
    adamw_step(flat, collect_gradients(g, nodes), opt, config.learning_rate, config.weight_decay);
    model::unflatten_parameters(params, flat);

    loss_sum += loss_value;
    ++batches;
  }
  return loss_sum / static_cast<double>(batches);
}

namespace {

HardMetrics hard_metrics_from_probs(const Tensor& probs, const data::Dataset& ds,
                                    const std::vector<double>& betas) {
  Tensor hard = softset::hard_membership_rows(probs);
  softset::SoftConfusionMatrix c =
      softset::confusion_rows(ds.labels, hard.values.data(), ds.size(), ds.d);
  HardMetrics out;
  std::vector<double> ones(ds.d, 1.0);
  out.macro_f1 = metrics::macro_f_beta(c, ones);
  out.accuracy = metrics::accuracy(c);
  out.mcc = metrics::mcc(c);
  out.macro_f_beta = betas.empty() ? out.macro_f1 : metrics::macro_f_beta(c, betas);
  for (std::size_t k = 1; k <= ds.d; ++k) {
    const auto [p, r] = metrics::precision_recall(c, k);
    out.precision.push_back(p);
    out.recall.push_back(r);
  }
  return out;
}

double loss_from_probs(const Tensor& probs, const TrainConfig& config, heaviside::Temperature t,
                       const data::Dataset& ds) {
  switch (config.loss) {
    case LossKind::kEast: {
      Tensor soft = softset::soft_membership_rows(probs, t);
      softset::SoftConfusionMatrix c =
          softset::confusion_rows(ds.labels, soft.values.data(), ds.size(), ds.d);
      return metrics::loss_from_metric(config.metric.kind, metrics::evaluate(config.metric, c));
    }
    case LossKind::kCrossEntropy:
      return metrics::cross_entropy(probs.values.data(), ds.labels, ds.d);
    case LossKind::kDice:
      return metrics::dice_loss(probs.values.data(), ds.labels, ds.size(), ds.d);
  }
  throw std::logic_error("loss_from_probs: unhandled loss kind");
}

}  // namespace

HardMetrics evaluate_hard(const model::MlpParams& params, const data::Dataset& ds,
                          const std::vector<double>& betas) {
  Rng rng(0);
  Tensor probs = model::forward(params, ds.features, /*train_mode=*/false, rng);
  return hard_metrics_from_probs(probs, ds, betas);
}

double evaluate_loss(const model::MlpParams& params, const TrainConfig& config,
                     heaviside::Temperature t, const data::Dataset& ds) {
  Rng rng(0);
  Tensor probs = model::forward(params, ds.features, /*train_mode=*/false, rng);
  return loss_from_probs(probs, config, t, ds);
}

FitResult fit(const TrainConfig& config, const data::Dataset& trainset, const data::Dataset& val) {
  config.validate();
  if (config.loss == LossKind::kEast) config.metric.validate(trainset.d);

  model::MlpParams params =
      model::init_custom(trainset.input_dim(), config.hidden, trainset.d, config.dropout,
                         config.seed);
  Rng rng(Rng::derive_seed(config.seed, 1));
  AdamWState opt;
  TrainHistory history;

  if (config.batch_size < 16 * trainset.d) {
    history.warnings.push_back("batch_size " + std::to_string(config.batch_size) +
                               " is below 16*d=" + std::to_string(16 * trainset.d) +
                               "; per-batch metric estimates may be noisy");
    std::cerr << "[east] warning: " << history.warnings.back() << "\n";
  }

  AnnealState anneal;
  anneal.t0 = config.t0;
  anneal.r = config.decay_r;
  anneal.inner_patience = config.inner_patience;
  anneal.outer_patience = config.outer_patience;

  model::MlpParams best_params = params;
  const bool annealed = config.loss == LossKind::kEast;
  std::size_t epoch = 0;

  while (true) {
    const heaviside::Temperature t = anneal_temperature(anneal);
    double phase_best = std::numeric_limits<double>::infinity();
    bool improved_this_phase = false;
    anneal.epochs_since_improve = 0;

    for (std::size_t phase_epoch = 0; phase_epoch < config.max_epochs_per_phase; ++phase_epoch) {
      const double train_loss = train_epoch(params, config, t, trainset, rng, opt);
      Rng eval_rng(0);
      const Tensor val_probs = model::forward(params, val.features, /*train_mode=*/false, eval_rng);
      const double val_loss = loss_from_probs(val_probs, config, t, val);
      const HardMetrics hm = hard_metrics_from_probs(val_probs, val, {});
      ++epoch;
      history.epochs.push_back(EpochRecord{epoch, anneal.k, annealed ? t.value() : 0.0,
                                           train_loss, val_loss, hm.macro_f1, hm.accuracy,
                                           hm.mcc});

      if (val_loss < phase_best) {
        phase_best = val_loss;
        anneal.epochs_since_improve = 0;
      } else {
        ++anneal.epochs_since_improve;
      }
      if (val_loss < anneal.best_val_loss) {
        anneal.best_val_loss = val_loss;
        best_params = params;
        history.best_val_loss = val_loss;
        history.best_epoch = epoch;
        history.best_temperature = annealed ? t.value() : 0.0;
        improved_this_phase = true;
      }
      if (anneal.epochs_since_improve >= config.inner_patience) break;
    }
    history.phase_end_epochs.push_back(epoch);

    if (!annealed) {
      history.stop_reason = "single_phase_early_stop";
      break;
    }
    if (improved_this_phase) {
      anneal.phases_since_improve = 0;
    } else {
      ++anneal.phases_since_improve;
    }
    if (anneal.phases_since_improve >= config.outer_patience) {
      history.stop_reason = "outer_patience";
      break;
    }
    if (anneal.k + 1 >= config.max_phases) {
      history.stop_reason = "max_phases";
      break;
    }
    ++anneal.k;
  }

  return FitResult{std::move(best_params), std::move(history)};
}

std::size_t GridSpec::cells() const {
  return batch_sizes.size() * learning_rates.size() * dropouts.size() * decays.size();
}

GridSearchOutcome grid_search(const TrainConfig& base, const GridSpec& grid,
                              const data::Dataset& trainset, const data::Dataset& val,
                              std::size_t parallel) {
  if (grid.cells() == 0) throw std::invalid_argument("grid_search: empty grid");

  std::vector<TrainConfig> configs;
  for (std::size_t bs : grid.batch_sizes) {
    for (double lr : grid.learning_rates) {
      for (double dr : grid.dropouts) {
        for (double r : grid.decays) {
          TrainConfig c = base;
          c.batch_size = bs;
          c.learning_rate = lr;
          c.dropout = dr;
          c.decay_r = r;
          c.seed = Rng::derive_seed(base.seed, configs.size());
          configs.push_back(std::move(c));
        }
      }
    }
  }

  std::vector<GridResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      FitResult fr = fit(configs[i], trainset, val);
      results[i] = GridResult{configs[i], fr.history.best_val_loss, i};
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(parallel, configs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].val_loss < results[best].val_loss) best = i;
  }
  return GridSearchOutcome{results[best], std::move(results)};
}

}  // namespace east::train
