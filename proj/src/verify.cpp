// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "east/graph.hpp"
#include "east/heaviside.hpp"
#include "east/rng.hpp"

namespace east::verify {

namespace {

constexpr double kMonotoneSlack = 1e-9;

// Uniform point on the simplex via normalized exponentials; rejects until
// the top-2 gap is large enough.
std::vector<double> sample_simplex_point(Rng& rng, std::size_t d, double gap_min) {
  std::vector<double> p(d);
  for (int tries = 0; tries < 100000; ++tries) {
    double sum = 0.0;
    for (double& v : p) {
      v = -std::log(1.0 - rng.uniform());
      sum += v;
    }
    for (double& v : p) v /= sum;
    std::size_t i1, i2;
    heaviside::top2(p, i1, i2);
    if (p[i1] - p[i2] >= gap_min) return p;
  }
  throw std::runtime_error("sample_simplex_point: gap " + std::to_string(gap_min) +
                           " not reachable at d=" + std::to_string(d));
}

void accumulate_example(softset::SoftConfusionMatrix& c, const Tensor& memberships,
                        const std::vector<int>& labels, std::size_t d, std::size_t e) {
  const double* row = memberships.values.data() + e * d;
  double* crow = c.entries.data() + (labels[e] - 1) * d;
  for (std::size_t j = 0; j < d; ++j) crow[j] += row[j];
}

/// i.i.d. draws from the frozen population.
softset::SoftConfusionMatrix resample_confusion(const Tensor& memberships,
                                                const std::vector<int>& labels, std::size_t d,
                                                std::size_t n, Rng& rng) {
  softset::SoftConfusionMatrix c = softset::SoftConfusionMatrix::zeros(d);
  const std::size_t pop = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    accumulate_example(c, memberships, labels, d, rng.uniform_index(pop));
  }
  c.mass = static_cast<double>(n);
  return c;
}

/// Random subsample without replacement (Floyd's algorithm); n equal to the
/// population size reproduces the population exactly.
softset::SoftConfusionMatrix subsample_confusion(const Tensor& memberships,
                                                 const std::vector<int>& labels, std::size_t d,
                                                 std::size_t n, Rng& rng) {
  const std::size_t pop = labels.size();
  if (n > pop) {
    throw std::invalid_argument("subsample_confusion: n " + std::to_string(n) +
                                " exceeds population " + std::to_string(pop));
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  std::vector<bool> used(pop, false);
  for (std::size_t i = pop - n; i < pop; ++i) {
    const std::size_t j = rng.uniform_index(i + 1);
    if (used[j]) {
      used[i] = true;
      chosen.push_back(i);
    } else {
      used[j] = true;
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  softset::SoftConfusionMatrix c = softset::SoftConfusionMatrix::zeros(d);
  for (std::size_t e : chosen) accumulate_example(c, memberships, labels, d, e);
  c.mass = static_cast<double>(n);
  return c;
}

Tensor forward_chunked(const model::MlpParams& params, const Tensor& x) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t n = x.rows(), dim = x.cols();
  Tensor probs = Tensor::zeros({n, params.d});
  Rng rng(0);
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t stop = std::min(start + kChunk, n);
    Tensor xb = Tensor::zeros({stop - start, dim});
    std::copy(x.values.begin() + start * dim, x.values.begin() + stop * dim, xb.values.begin());
    Tensor pb = model::forward(params, xb, /*train_mode=*/false, rng);
    std::copy(pb.values.begin(), pb.values.end(), probs.values.begin() + start * params.d);
  }
  return probs;
}

}  // namespace

nlohmann::json VerifyReport::to_json() const {
  return nlohmann::json{{"check", check},
                        {"parameters", parameters},
                        {"stats", stats},
                        {"tolerance", tolerance},
                        {"pass", pass}};
}

VerifyReport check_gT_convergence(std::size_t num_points, double gap_min,
                                  const std::vector<double>& t_ladder, std::uint64_t seed) {
  if (!(gap_min > 0.0)) throw std::invalid_argument("check_gT_convergence: gap_min must be > 0");
  for (std::size_t i = 1; i < t_ladder.size(); ++i) {
    if (!(t_ladder[i] < t_ladder[i - 1])) {
      throw std::invalid_argument("check_gT_convergence: ladder must be strictly decreasing");
    }
  }
  Rng rng(seed);
  std::vector<std::vector<double>> points;
  points.reserve(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    const std::size_t d = 2 + rng.uniform_index(9);  // 2..10
    points.push_back(sample_simplex_point(rng, d, gap_min));
  }

  std::vector<double> max_dev(t_ladder.size(), 0.0);
  for (std::size_t ti = 0; ti < t_ladder.size(); ++ti) {
    const heaviside::Temperature t(t_ladder[ti]);
    for (const auto& p : points) {
      const softset::ProbVector pv(p);
      const auto soft = softset::predict_soft(pv, t);
      const auto hard = softset::predict_hard(pv);
      double dev = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        dev = std::max(dev, std::abs(soft[j] - hard[j]));
      }
      max_dev[ti] = std::max(max_dev[ti], dev);
    }
  }

  bool monotone = true;
  for (std::size_t i = 1; i < max_dev.size(); ++i) {
    if (max_dev[i] > max_dev[i - 1] + kMonotoneSlack) monotone = false;
  }
  VerifyReport r;
  r.check = "gt-convergence";
  r.parameters = {{"num_points", num_points}, {"gap_min", gap_min}, {"t_ladder", t_ladder},
                  {"seed", seed}};
  r.tolerance = 1e-2;
  r.stats = {{"max_deviation_per_t", max_dev}, {"monotone", monotone}};
  r.pass = monotone && max_dev.back() < r.tolerance;
  return r;
}

VerifyReport check_metric_convergence(const data::Dataset& dataset,
                                      const model::MlpParams& params,
                                      const std::vector<double>& t_ladder,
                                      const metrics::MetricSpec& metric) {
  Tensor probs = forward_chunked(params, dataset.features);
  Tensor hard = softset::hard_membership_rows(probs);
  const auto c_hard =
      softset::confusion_rows(dataset.labels, hard.values.data(), dataset.size(), dataset.d);
  const double m_hard = metrics::evaluate(metric, c_hard);

  // The confusion matrix converges entrywise and monotonically; the signed
  // metric difference may cross zero on the way, so the monotone statistic
  // is the scaled entrywise max-norm while the tolerance applies to the
  // metric gap.
  std::vector<double> gaps, entry_devs;
  for (double tv : t_ladder) {
    Tensor soft = softset::soft_membership_rows(probs, heaviside::Temperature(tv));
    const auto c_soft =
        softset::confusion_rows(dataset.labels, soft.values.data(), dataset.size(), dataset.d);
    gaps.push_back(std::abs(metrics::evaluate(metric, c_soft) - m_hard));
    double dev = 0.0;
    for (std::size_t i = 0; i < c_soft.entries.size(); ++i) {
      dev = std::max(dev, std::abs(c_soft.entries[i] - c_hard.entries[i]));
    }
    entry_devs.push_back(dev / static_cast<double>(dataset.size()));
  }

  bool monotone = true;
  for (std::size_t i = 2; i < entry_devs.size(); ++i) {
    if (entry_devs[i] > entry_devs[i - 1] + kMonotoneSlack) monotone = false;
  }
  VerifyReport r;
  r.check = "metric-convergence";
  r.parameters = {{"metric", metrics::to_string(metric.kind)},
                  {"t_ladder", t_ladder},
                  {"n", dataset.size()}};
  r.tolerance = 1e-3;
  r.stats = {{"hard_value", m_hard},
             {"gap_per_t", gaps},
             {"entry_deviation_per_t", entry_devs},
             {"entry_deviation_monotone_after_first", monotone}};
  r.pass = monotone && !gaps.empty() && gaps.back() < r.tolerance;
  return r;
}

FrozenSetup make_frozen_setup(std::size_t population_size, std::size_t d, std::uint64_t seed) {
  std::vector<double> weights(d, 1.0 / static_cast<double>(d));
  data::Dataset pop = data::gen_synthetic(d, population_size, weights, 2.0, seed);
  model::MlpParams params = model::init(d, d, 0.0, Rng::derive_seed(seed, 77));
  return FrozenSetup{std::move(pop), std::move(params)};
}

Tensor population_memberships(const data::Dataset& ds, const model::MlpParams& params) {
  Tensor probs = forward_chunked(params, ds.features);
  return softset::hard_membership_rows(probs);
}

VerifyReport check_unbiasedness(std::size_t population_size,
                                const std::vector<std::size_t>& batch_sizes,
                                std::size_t num_resamples, const metrics::MetricSpec& metric,
                                std::uint64_t seed) {
  FrozenSetup setup = make_frozen_setup(population_size, 3, seed);
  Tensor memberships = population_memberships(setup.population, setup.params);
  const auto c_pop = softset::confusion_rows(setup.population.labels, memberships.values.data(),
                                             setup.population.size(), setup.population.d);
  const double truth = metrics::evaluate(metric, c_pop);

  std::vector<double> biases, ses;
  for (std::size_t bi = 0; bi < batch_sizes.size(); ++bi) {
    const std::size_t n = batch_sizes[bi];
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t trial = 0; trial < num_resamples; ++trial) {
      Rng rng(Rng::derive_seed(seed, bi * num_resamples + trial + 1));
      const auto c = subsample_confusion(memberships, setup.population.labels,
                                         setup.population.d, n, rng);
      const double m = metrics::evaluate(metric, c);
      sum += m;
      sum_sq += m * m;
    }
    const double mean = sum / static_cast<double>(num_resamples);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(num_resamples) - mean * mean);
    biases.push_back(mean - truth);
    ses.push_back(std::sqrt(var / static_cast<double>(num_resamples)));
  }

  // Monotone within twice the Monte Carlo standard error of the difference.
  bool monotone = true;
  for (std::size_t i = 1; i < biases.size(); ++i) {
    const double slack = 2.0 * std::sqrt(ses[i] * ses[i] + ses[i - 1] * ses[i - 1]);
    if (std::abs(biases[i]) > std::abs(biases[i - 1]) + slack) monotone = false;
  }
  VerifyReport r;
  r.check = "unbiasedness";
  r.parameters = {{"population_size", population_size},
                  {"batch_sizes", batch_sizes},
                  {"num_resamples", num_resamples},
                  {"metric", metrics::to_string(metric.kind)},
                  {"seed", seed}};
  r.tolerance = 0.01;
  r.stats = {{"population_value", truth},
             {"bias_per_n", biases},
             {"standard_error_per_n", ses},
             {"monotone", monotone}};
  r.pass = monotone && !biases.empty() && std::abs(biases.back()) < r.tolerance;
  return r;
}

VerifyReport check_concentration(const data::Dataset& population, const model::MlpParams& params,
                                 std::size_t n, double delta, std::size_t num_trials,
                                 std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("check_concentration: delta outside (0,1)");
  }
  const std::size_t d = population.d;
  Tensor memberships = population_memberships(population, params);
  auto c_pop = softset::confusion_rows(population.labels, memberships.values.data(),
                                       population.size(), d);
  c_pop = softset::scale(c_pop, 1.0 / static_cast<double>(population.size()));

  const double bound =
      std::sqrt(std::log(2.0 * static_cast<double>(d * d) / delta) / (2.0 * static_cast<double>(n)));
  std::size_t violations = 0;
  double max_seen = 0.0;
  for (std::size_t trial = 0; trial < num_trials; ++trial) {
    Rng rng(Rng::derive_seed(seed, trial + 1));
    auto c = resample_confusion(memberships, population.labels, d, n, rng);
    c = softset::scale(c, 1.0 / static_cast<double>(n));
    double dev = 0.0;
    for (std::size_t i = 0; i < d * d; ++i) {
      dev = std::max(dev, std::abs(c.entries[i] - c_pop.entries[i]));
    }
    max_seen = std::max(max_seen, dev);
    if (dev > bound) ++violations;
  }
  const double frac = static_cast<double>(violations) / static_cast<double>(num_trials);
  const double slack = 2.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(num_trials));

  VerifyReport r;
  r.check = "concentration";
  r.parameters = {{"n", n}, {"delta", delta}, {"num_trials", num_trials},
                  {"d", d}, {"seed", seed}, {"population_size", population.size()}};
  r.tolerance = delta + slack;
  r.stats = {{"bound", bound},
             {"violation_fraction", frac},
             {"max_deviation_seen", max_seen},
             {"binomial_slack", slack}};
  r.pass = frac <= r.tolerance;
  return r;
}

std::vector<double> rate_medians(const Tensor& memberships, const std::vector<int>& labels,
                                 std::size_t d,
                                 const std::function<double(const softset::SoftConfusionMatrix&)>& metric,
                                 const std::vector<std::size_t>& n_ladder, std::size_t num_trials,
                                 std::uint64_t seed) {
  softset::SoftConfusionMatrix c_pop = softset::SoftConfusionMatrix::zeros(d);
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const double* row = memberships.values.data() + e * d;
    for (std::size_t j = 0; j < d; ++j) c_pop.at(labels[e] - 1, j) += row[j];
  }
  c_pop.mass = static_cast<double>(labels.size());
  const double truth = metric(c_pop);

  std::vector<double> medians;
  for (std::size_t ni = 0; ni < n_ladder.size(); ++ni) {
    std::vector<double> devs(num_trials);
    for (std::size_t trial = 0; trial < num_trials; ++trial) {
      Rng rng(Rng::derive_seed(seed, ni * num_trials + trial + 1));
      const auto c = resample_confusion(memberships, labels, d, n_ladder[ni], rng);
      devs[trial] = std::abs(metric(c) - truth);
    }
    std::sort(devs.begin(), devs.end());
    medians.push_back(devs[num_trials / 2]);
  }
  return medians;
}

VerifyReport check_rate(const data::Dataset& population, const model::MlpParams& params,
                        const metrics::MetricSpec& metric, const std::vector<std::size_t>& n_ladder,
                        std::size_t num_trials, std::uint64_t seed) {
  if (n_ladder.size() < 2) throw std::invalid_argument("check_rate: ladder needs >= 2 sizes");
  Tensor memberships = population_memberships(population, params);
  auto mfn = [&metric](const softset::SoftConfusionMatrix& c) {
    return metrics::evaluate(metric, c);
  };
  const std::vector<double> medians =
      rate_medians(memberships, population.labels, population.d, mfn, n_ladder, num_trials, seed);

  std::vector<double> normalized;
  for (std::size_t i = 0; i < medians.size(); ++i) {
    normalized.push_back(medians[i] * std::sqrt(static_cast<double>(n_ladder[i])));
  }
  const double lo = *std::min_element(normalized.begin(), normalized.end());
  const double hi = *std::max_element(normalized.begin(), normalized.end());
  const bool all_zero = hi == 0.0;

  VerifyReport r;
  r.check = "rate";
  r.parameters = {{"metric", metrics::to_string(metric.kind)},
                  {"n_ladder", n_ladder},
                  {"num_trials", num_trials},
                  {"seed", seed},
                  {"population_size", population.size()}};
  r.tolerance = 2.5;
  r.stats = {{"median_per_n", medians}, {"normalized_median_per_n", normalized},
             {"spread_factor", all_zero ? 1.0 : hi / lo}};
  r.pass = all_zero || (lo > 0.0 && hi / lo < r.tolerance);
  return r;
}

VerifyReport check_tsoi_compat(const std::vector<double>& tau_grid) {
  const heaviside::Temperature t(0.2);
  bool exact_band = true;
  double max_anchor_err = 0.0;
  for (double tau : tau_grid) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("check_tsoi_compat: tau outside (0,1)");
    }
    const auto tp = heaviside::ThresholdParams::make(tau, t);
    if (tp.tau_m != std::min(tau, 1.0 - tau)) exact_band = false;
    const double anchors[5][2] = {{0.0, 0.0},
                                  {tau - tp.tau_m / 2.0, 0.2},
                                  {tau, 0.5},
                                  {tau + tp.tau_m / 2.0, 0.8},
                                  {1.0, 1.0}};
    for (const auto& a : anchors) {
      max_anchor_err =
          std::max(max_anchor_err, std::abs(heaviside::heaviside_linear(a[0], tau, t) - a[1]));
    }
  }
  VerifyReport r;
  r.check = "tsoi-compat";
  r.parameters = {{"grid_size", tau_grid.size()}};
  r.tolerance = 1e-12;
  r.stats = {{"band_width_exact", exact_band}, {"max_anchor_error", max_anchor_err}};
  r.pass = exact_band && max_anchor_err <= r.tolerance;
  return r;
}

diff::Value build_loss_from_flat(diff::Graph& g, diff::Value flat, const model::MlpParams& ref,
                                 const Tensor& batch, std::span<const int> labels,
                                 const metrics::MetricSpec& spec, heaviside::Temperature t) {
  std::size_t off = 0;
  diff::Value h = g.constant(batch);
  const std::size_t layers = ref.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = ref.weights[l].rows();
    const std::size_t fan_out = ref.weights[l].cols();
    diff::Value w = g.segment(flat, off, {fan_in, fan_out});
    off += fan_in * fan_out;
    diff::Value b = g.segment(flat, off, {fan_out});
    off += fan_out;
    h = g.add(g.matmul(h, w), b);
    if (l + 1 < layers) h = g.relu(h);
  }
  diff::Value probs = g.softmax_rows(h);
  diff::Value yhat = g.l1_normalize_rows(g.heaviside_pl(probs, t));
  Tensor lt = Tensor::zeros({ref.d, labels.size()});
  for (std::size_t e = 0; e < labels.size(); ++e) {
    lt.at(static_cast<std::size_t>(labels[e] - 1), e) = 1.0;
  }
  diff::Value confusion = g.matmul(g.constant(lt), yhat);
  return metrics::surrogate_loss(g, spec, confusion, ref.d);
}

double surrogate_margin(const model::MlpParams& params, const Tensor& batch,
                        heaviside::Temperature t) {
  double margin = std::numeric_limits<double>::infinity();
  Tensor h = batch;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    Tensor z = matmul(h, params.weights[l]);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += params.biases[l].values[j];
    if (l + 1 < params.layer_count()) {
      for (double& v : z.values) {
        margin = std::min(margin, std::abs(v));
        v = v > 0.0 ? v : 0.0;
      }
    }
    h = std::move(z);
  }
  Rng rng(0);
  Tensor probs = model::forward(params, batch, /*train_mode=*/false, rng);
  const std::size_t d = probs.cols();
  std::vector<double> sorted(d);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    std::span<const double> row(probs.values.data() + i * d, d);
    const double tau = heaviside::tau_avg(row);
    for (double p : row) margin = std::min(margin, heaviside::breakpoint_distance(p, tau, t));
    std::copy(row.begin(), row.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    margin = std::min(margin, sorted[0] - sorted[1]);
    if (d > 2) margin = std::min(margin, sorted[1] - sorted[2]);
  }
  return margin;
}

diff::GradCheckReport surrogate_gradcheck_small_mlp(const metrics::MetricSpec& spec,
                                                    std::uint64_t seed) {
  constexpr std::size_t kBatch = 12, kInputDim = 4, kD = 3;
  constexpr double kMarginMin = 1e-3;
  const heaviside::Temperature t(0.1);

  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == 200) {
      throw std::runtime_error("surrogate_gradcheck_small_mlp: no batch with margin >= 1e-3");
    }
    const std::uint64_t s = Rng::derive_seed(seed, attempt);
    model::MlpParams params = model::init_custom(kInputDim, {8, 6}, kD, 0.0, s);
    Rng rng(Rng::derive_seed(s, 1));
    Tensor xb = Tensor::zeros({kBatch, kInputDim});
    for (double& v : xb.values) v = rng.normal();
    std::vector<int> yb(kBatch);
    for (int& y : yb) y = 1 + static_cast<int>(rng.uniform_index(kD));

    if (surrogate_margin(params, xb, t) < kMarginMin) continue;

    Tensor flat = Tensor::vector(model::flatten_parameters(params));
    auto builder = [&](diff::Graph& g, diff::Value x) {
      return build_loss_from_flat(g, x, params, xb, yb, spec, t);
    };
    return diff::grad_check(builder, flat, 1e-5, 1e-4);
  }
}

VerifyReport check_gradcheck(std::size_t num_batches, std::uint64_t seed) {
  double max_rel = 0.0;
  std::size_t flagged = 0, skipped = 0;
  const std::vector<metrics::MetricSpec> specs = {
      metrics::MetricSpec::macro_f_beta({0.25, 1.0, 5.0}), metrics::MetricSpec::accuracy(),
      metrics::MetricSpec::mcc()};
  for (std::size_t b = 0; b < num_batches; ++b) {
    for (std::size_t si = 0; si < specs.size(); ++si) {
      const auto report = surrogate_gradcheck_small_mlp(
          specs[si], Rng::derive_seed(seed, b * specs.size() + si));
      if (report.skipped_near_breakpoint) {
        ++skipped;
        continue;
      }
      max_rel = std::max(max_rel, report.max_rel_error);
      flagged += report.flagged_count;
    }
  }
  VerifyReport r;
  r.check = "gradcheck";
  r.parameters = {{"num_batches", num_batches}, {"seed", seed}};
  r.tolerance = 1e-4;
  r.stats = {{"max_rel_error", max_rel}, {"flagged", flagged}, {"skipped", skipped}};
  r.pass = flagged == 0 && max_rel < r.tolerance;
  return r;
}

}  // namespace east::verify
