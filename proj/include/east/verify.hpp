// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "east/data.hpp"
#include "east/metrics.hpp"
#include "east/model.hpp"
#include "east/softset.hpp"

namespace east::verify {

/// Machine-readable result of one numerical check. The pass flag is a pure
/// function of the recorded statistics and tolerance.
struct VerifyReport {
  std::string check;
  nlohmann::json parameters;
  nlohmann::json stats;
  double tolerance = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Soft membership g_T converges to the hard assignment as T drops: samples
/// random simplex points (d in 2..10) with top-2 gap >= gap_min and records
/// the worst max-norm deviation per ladder temperature. Passes if the
/// deviations are nonincreasing down the ladder and below 1e-2 at the end.
VerifyReport check_gT_convergence(std::size_t num_points, double gap_min,
                                  const std::vector<double>& t_ladder, std::uint64_t seed);

/// |M(C_T) - M(C)| on a fixed model and dataset per ladder temperature.
/// Passes if the sequence is nonincreasing after its first term and the
/// final gap is below 1e-3.
VerifyReport check_metric_convergence(const data::Dataset& dataset,
                                      const model::MlpParams& params,
                                      const std::vector<double>& t_ladder,
                                      const metrics::MetricSpec& metric);

/// Bias of M over resampled batches against the exact value on a frozen
/// synthetic population with a frozen model. Passes if |mean bias| is
/// nonincreasing in n (within twice the Monte Carlo standard error) and
/// below 0.01 at the largest n.
VerifyReport check_unbiasedness(std::size_t population_size,
                                const std::vector<std::size_t>& batch_sizes,
                                std::size_t num_resamples, const metrics::MetricSpec& metric,
                                std::uint64_t seed);

/// Fraction of resamples where the scaled empirical confusion matrix
/// deviates from the population one by more than sqrt(log(2 d^2/delta)/(2n)).
/// Passes if that fraction is at most delta plus two binomial standard
/// errors.
VerifyReport check_concentration(const data::Dataset& population, const model::MlpParams& params,
                                 std::size_t n, double delta, std::size_t num_trials,
                                 std::uint64_t seed);

/// Median |M(empirical) - M(population)| scaled by sqrt(n) across a ladder
/// of batch sizes. Passes if the normalized medians vary by less than a
/// factor of 2.5 (all-zero deviations pass trivially).
VerifyReport check_rate(const data::Dataset& population, const model::MlpParams& params,
                        const metrics::MetricSpec& metric, const std::vector<std::size_t>& n_ladder,
                        std::size_t num_trials, std::uint64_t seed);

/// Pluggable-metric core of check_rate, also used by tests.
std::vector<double> rate_medians(const Tensor& memberships, const std::vector<int>& labels,
                                 std::size_t d,
                                 const std::function<double(const softset::SoftConfusionMatrix&)>& metric,
                                 const std::vector<std::size_t>& n_ladder, std::size_t num_trials,
                                 std::uint64_t seed);

/// At T = 0.2 the band width equals min(tau, 1-tau) exactly and the step
/// surrogate interpolates its five anchor points.
VerifyReport check_tsoi_compat(const std::vector<double>& tau_grid);

/// Analytic gradients of the three surrogate losses against central finite
/// differences over every parameter of a compact classifier, on random
/// batches kept away from breakpoints.
VerifyReport check_gradcheck(std::size_t num_batches, std::uint64_t seed);

/// Frozen synthetic population and model used by the sampling checks.
struct FrozenSetup {
  data::Dataset population;
  model::MlpParams params;
};
FrozenSetup make_frozen_setup(std::size_t population_size, std::size_t d, std::uint64_t seed);

/// Hard membership rows of the model over a dataset, computed in chunks.
Tensor population_memberships(const data::Dataset& ds, const model::MlpParams& params);

/// Surrogate loss of a classifier as a graph over one flat parameter leaf,
/// so gradients with respect to every parameter can be finite-differenced
/// in a single grad_check call. `ref` supplies the layer dimensions.
diff::Value build_loss_from_flat(diff::Graph& g, diff::Value flat, const model::MlpParams& ref,
                                 const Tensor& batch, std::span<const int> labels,
                                 const metrics::MetricSpec& spec, heaviside::Temperature t);

/// Smallest smoothness margin of the surrogate loss at these parameters:
/// hidden pre-activation magnitudes, distances of probability rows to the
/// step-surrogate breakpoints, and the two top-order gaps that keep the
/// dynamic threshold's argmax selection stable.
double surrogate_margin(const model::MlpParams& params, const Tensor& batch,
                        heaviside::Temperature t);

/// grad_check of the surrogate loss for a compact random classifier on a
/// random batch, resampled until the margin is comfortable. eps = 1e-5,
/// rel_tol = 1e-4.
diff::GradCheckReport surrogate_gradcheck_small_mlp(const metrics::MetricSpec& spec,
                                                    std::uint64_t seed);

}  // namespace east::verify
