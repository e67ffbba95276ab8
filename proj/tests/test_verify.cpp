// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/verify.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "east/heaviside.hpp"
#include "east/rng.hpp"

using namespace east;
using namespace east::verify;

namespace {

const std::vector<double> kLadder{0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4};

FrozenSetup small_setup(std::uint64_t seed) {
  data::Dataset pop = data::gen_synthetic(3, 20000, std::vector<double>{0.5, 0.3, 0.2}, 2.0, seed);
  model::MlpParams params = model::init_custom(3, {16, 8}, 3, 0.0, Rng::derive_seed(seed, 77));
  return FrozenSetup{std::move(pop), std::move(params)};
}

}  // namespace

TEST_CASE("gt convergence check passes and is deterministic") {
  const auto a = check_gT_convergence(200, 0.05, kLadder, 3);
  CHECK(a.pass);
  const auto devs = a.stats.at("max_deviation_per_t").get<std::vector<double>>();
  REQUIRE(devs.size() == kLadder.size());
  for (std::size_t i = 1; i < devs.size(); ++i) CHECK(devs[i] <= devs[i - 1] + 1e-9);
  CHECK(devs.back() < 1e-2);

  const auto b = check_gT_convergence(200, 0.05, kLadder, 3);
  CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("gt convergence rejects bad ladders") {
  CHECK_THROWS_AS(check_gT_convergence(10, 0.05, {0.1, 0.2}, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_gT_convergence(10, 0.0, kLadder, 1), std::invalid_argument);
}

TEST_CASE("single sharp point deviates by less than 1e-4 at T=1e-6") {
  const softset::ProbVector p({0.9, 0.1});
  const auto soft = softset::predict_soft(p, heaviside::Temperature(1e-6));
  CHECK(std::abs(soft[0] - 1.0) < 1e-4);
  CHECK(std::abs(soft[1]) < 1e-4);
}

TEST_CASE("metric convergence check on a random and a saturated model") {
  data::Dataset ds = data::gen_synthetic(3, 800, std::vector<double>{0.4, 0.35, 0.25}, 2.0, 5);
  model::MlpParams params = model::init_custom(3, {16, 8}, 3, 0.0, 6);

  for (const auto& spec : {metrics::MetricSpec::macro_f1(3), metrics::MetricSpec::accuracy(),
                           metrics::MetricSpec::mcc()}) {
    const auto r = check_metric_convergence(ds, params, kLadder, spec);
    CHECK(r.pass);
    CHECK(r.stats.at("gap_per_t").get<std::vector<double>>().back() < 1e-3);
  }

  // Saturate the logits: the soft matrix collapses onto the hard one.
  model::MlpParams sharp = params;
  for (double& v : sharp.weights.back().values) v *= 200.0;
  const auto r = check_metric_convergence(ds, sharp, kLadder, metrics::MetricSpec::accuracy());
  for (double gap : r.stats.at("gap_per_t").get<std::vector<double>>()) CHECK(gap < 1e-9);
}

TEST_CASE("unbiasedness check with the population itself as one batch size") {
  const auto r = check_unbiasedness(20000, {100, 400, 2000, 20000}, 250,
                                    metrics::MetricSpec::macro_f1(3), 11);
  CHECK(r.pass);
  const auto biases = r.stats.at("bias_per_n").get<std::vector<double>>();
  // Sampling the whole population without replacement reproduces the truth.
  CHECK(std::abs(biases.back()) == 0.0);
}

TEST_CASE("unbiasedness of accuracy at moderate sizes") {
  const auto r =
      check_unbiasedness(20000, {100, 1000}, 300, metrics::MetricSpec::accuracy(), 13);
  CHECK(r.pass);
  // Accuracy is a plain mean, so subsampling is exactly unbiased up to
  // Monte Carlo noise.
  const auto biases = r.stats.at("bias_per_n").get<std::vector<double>>();
  const auto ses = r.stats.at("standard_error_per_n").get<std::vector<double>>();
  for (std::size_t i = 0; i < biases.size(); ++i) {
    CHECK(std::abs(biases[i]) < 5.0 * ses[i] + 1e-12);
  }
}

TEST_CASE("concentration bound arithmetic and check") {
  const FrozenSetup setup = small_setup(17);
  const auto r = check_concentration(setup.population, setup.params, 500, 0.05, 400, 17);
  CHECK(r.pass);
  CHECK(r.stats.at("bound").get<double>() ==
        doctest::Approx(std::sqrt(std::log(2.0 * 9.0 / 0.05) / 1000.0)).epsilon(1e-12));
  CHECK(r.stats.at("bound").get<double>() == doctest::Approx(0.0767).epsilon(1e-2));

  // Quadrupling n halves the bound.
  const auto r4 = check_concentration(setup.population, setup.params, 2000, 0.05, 50, 18);
  CHECK(r4.stats.at("bound").get<double>() ==
        doctest::Approx(0.5 * r.stats.at("bound").get<double>()).epsilon(1e-12));

  CHECK_THROWS_AS(check_concentration(setup.population, setup.params, 500, 0.0, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("rate check: sqrt(n)-normalized medians stay within the band") {
  const FrozenSetup setup = small_setup(19);
  for (const auto& spec : {metrics::MetricSpec::macro_f1(3), metrics::MetricSpec::accuracy()}) {
    const auto r = check_rate(setup.population, setup.params, spec, {250, 1000, 4000}, 200, 19);
    CHECK(r.pass);
    CHECK(r.stats.at("spread_factor").get<double>() < 2.5);
  }
}

TEST_CASE("rate machinery reports zero deviation for a constant metric") {
  const FrozenSetup setup = small_setup(23);
  const Tensor memberships = population_memberships(setup.population, setup.params);
  const auto medians = rate_medians(
      memberships, setup.population.labels, 3,
      [](const softset::SoftConfusionMatrix&) { return 0.75; }, {250, 1000}, 50, 23);
  for (double m : medians) CHECK(m == 0.0);
}

TEST_CASE("band compatibility at T = 0.2 with anchor values") {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  const auto r = check_tsoi_compat(grid);
  CHECK(r.pass);
  CHECK(r.stats.at("band_width_exact").get<bool>());
  CHECK(r.stats.at("max_anchor_error").get<double>() <= 1e-12);

  // Hand anchors: tau = 0.5 puts the band edges at 0.25 and 0.75.
  const auto tp = heaviside::ThresholdParams::make(0.5, heaviside::Temperature(0.2));
  CHECK(tp.tau_m == 0.5);
  CHECK(heaviside::heaviside_linear(0.25, 0.5, heaviside::Temperature(0.2)) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(heaviside::heaviside_linear(0.75, 0.5, heaviside::Temperature(0.2)) ==
        doctest::Approx(0.8).epsilon(1e-12));
  const auto tp3 = heaviside::ThresholdParams::make(0.3, heaviside::Temperature(0.2));
  CHECK(tp3.tau_m == 0.3);
}

TEST_CASE("gradcheck harness passes for all three surrogate families") {
  const auto r = check_gradcheck(2, 29);
  CHECK(r.pass);
  CHECK(r.stats.at("max_rel_error").get<double>() < 1e-4);
}

TEST_CASE("sampling checks are deterministic given the seed") {
  const FrozenSetup setup = small_setup(31);
  const auto a = check_concentration(setup.population, setup.params, 300, 0.05, 100, 31);
  const auto b = check_concentration(setup.population, setup.params, 300, 0.05, 100, 31);
  CHECK(a.to_json().dump() == b.to_json().dump());
}
