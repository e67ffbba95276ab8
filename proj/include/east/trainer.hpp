// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "east/data.hpp"
#include "east/heaviside.hpp"
#include "east/metrics.hpp"
#include "east/model.hpp"
#include "east/rng.hpp"

namespace east::train {

enum class LossKind { kEast, kCrossEntropy, kDice };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

struct TrainConfig {
  LossKind loss = LossKind::kEast;
  metrics::MetricSpec metric;  // target metric for the EAST loss
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double dropout = 0.0;
  double t0 = 0.2;
  double decay_r = 0.9;
  std::uint64_t seed = 1;
  std::size_t max_epochs_per_phase = 200;
  std::size_t inner_patience = 50;  // epochs without val improvement ending a phase
  std::size_t outer_patience = 3;   // phases without a new global best ending the run
  std::size_t max_phases = 60;
  bool detach_tau = false;
  std::vector<std::size_t> hidden = {512, 256, 128};

  void validate() const;
};

/// Cooling state: the phase index k selects temperature t0 * r^k.
struct AnnealState {
  double t0 = 0.2;
  double r = 0.9;
  std::size_t k = 0;
  std::size_t inner_patience = 50;
  std::size_t outer_patience = 3;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improve = 0;
  std::size_t phases_since_improve = 0;
};

/// t0 * r^k clamped into (0, 0.4].
heaviside::Temperature anneal_temperature(const AnnealState& state);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, global across phases
  std::size_t phase = 0;
  double temperature = 0.0;  // 0 for baseline losses
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_accuracy = 0.0;
  double val_mcc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<std::size_t> phase_end_epochs;
  std::string stop_reason;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  double best_temperature = 0.0;
  std::vector<std::string> warnings;
};

std::string history_to_csv(const TrainHistory& history);

/// Decoupled weight decay Adam with bias-corrected moments.
struct AdamWState {
  std::vector<double> m, v;
  std::size_t t = 0;
};

void adamw_step(std::vector<double>& params, const std::vector<double>& grads, AdamWState& state,
                double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

/// One pass over the training data at temperature t; returns the mean batch
/// loss. Throws on a non-finite loss, naming the batch and temperature.
double train_epoch(model::MlpParams& params, const TrainConfig& config, heaviside::Temperature t,
                   const data::Dataset& train, Rng& rng, AdamWState& opt);

/// Hard metrics of a model on a dataset (integer confusion matrix).
struct HardMetrics {
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double mcc = 0.0;
  double macro_f_beta = 0.0;  // with the supplied betas (macro F1 betas if none)
  std::vector<double> precision, recall;  // per class
};
HardMetrics evaluate_hard(const model::MlpParams& params, const data::Dataset& ds,
                          const std::vector<double>& betas = {});

/// Validation loss in eval mode: the surrogate at temperature t for EAST,
/// the baseline's own loss otherwise.
double evaluate_loss(const model::MlpParams& params, const TrainConfig& config,
                     heaviside::Temperature t, const data::Dataset& ds);

struct FitResult {
  model::MlpParams params;
  TrainHistory history;
};

/// Annealed training loop. EAST runs phases k = 0, 1, ...: train at T_k
/// until the validation loss fails to improve for inner_patience epochs,
/// then cool and reset the counter; stop once outer_patience consecutive
/// phases end without a new global best. Baselines run a single phase.
/// Returns the parameters of the best validation epoch.
FitResult fit(const TrainConfig& config, const data::Dataset& train, const data::Dataset& val);

struct GridSpec {
  std::vector<std::size_t> batch_sizes;
  std::vector<double> learning_rates;
  std::vector<double> dropouts;
  std::vector<double> decays;  // annealing r

  std::size_t cells() const;
};

struct GridResult {
  TrainConfig config;
  double val_loss = std::numeric_limits<double>::infinity();
  std::size_t cell_index = 0;
};

struct GridSearchOutcome {
  GridResult best;
  std::vector<GridResult> all;
};

/// Runs fit for every cell of the Cartesian grid; cell i uses the RNG
/// stream derived from (base.seed, i), and the winner minimizes the final
/// best validation loss with ties resolved by grid order. With parallel > 1
/// the cells run concurrently and the winner is unchanged.
GridSearchOutcome grid_search(const TrainConfig& base, const GridSpec& grid,
                              const data::Dataset& train, const data::Dataset& val,
                              std::size_t parallel = 1);

}  // namespace east::train
