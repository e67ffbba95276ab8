// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "east/graph.hpp"
#include "east/heaviside.hpp"
#include "east/rng.hpp"

using namespace east;
using diff::Graph;
using diff::Value;
using heaviside::Temperature;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("matmul forward and shape validation") {
  Graph g;
  Value a = g.constant(Tensor::matrix(1, 2, {1, 2}));
  Value b = g.constant(Tensor::matrix(2, 1, {3, 4}));
  CHECK(g.value(g.matmul(a, b)).values[0] == doctest::Approx(11.0));
  Value bad = g.constant(Tensor::matrix(3, 1, {1, 2, 3}));
  CHECK_THROWS_WITH_AS(g.matmul(a, bad), doctest::Contains("matmul"), std::invalid_argument);
}

TEST_CASE("relu and softmax forward") {
  Graph g;
  Value x = g.constant(Tensor::vector({-1, 0, 2}));
  const Tensor& r = g.value(g.relu(x));
  CHECK(r.values == std::vector<double>{0, 0, 2});
  const Tensor& s = g.value(g.softmax_rows(g.constant(Tensor::vector({0, 0}))));
  CHECK(s.values[0] == doctest::Approx(0.5));
  CHECK(s.values[1] == doctest::Approx(0.5));
}

TEST_CASE("divide rejects zero denominators unless guarded") {
  Graph g;
  Value a = g.constant(Tensor::vector({1.0}));
  Value z = g.constant(Tensor::vector({0.0}));
  CHECK_THROWS_AS(g.div(a, z), std::runtime_error);
  CHECK(g.value(g.div_guard(a, z, 1e-12)).values[0] == doctest::Approx(1e12));
}

TEST_CASE("backward of sum(x*x) is 2x") {
  Graph g;
  Value x = g.leaf(Tensor::vector({1, 2}), true);
  Value root = g.sum(g.mul(x, x));
  g.backward(root);
  CHECK(g.grad(x).values[0] == doctest::Approx(2.0));
  CHECK(g.grad(x).values[1] == doctest::Approx(4.0));
}

TEST_CASE("backward of softmax-then-pick-first at a symmetric point") {
  Graph g;
  Value x = g.leaf(Tensor::vector({0, 0}), true);
  Value picked = g.sum(g.mul(g.softmax_rows(x), g.constant(Tensor::vector({1, 0}))));
  g.backward(picked);
  CHECK(g.grad(x).values[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(g.grad(x).values[1] == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("relu gradient vanishes on the inactive segment") {
  Graph g;
  Value x = g.leaf(Tensor::vector({-1.0}), true);
  g.backward(g.sum(g.relu(x)));
  CHECK(g.grad(x).values[0] == 0.0);
}

TEST_CASE("backward requires a scalar root") {
  Graph g;
  Value x = g.leaf(Tensor::vector({1, 2}), true);
  CHECK_THROWS_AS(g.backward(g.relu(x)), std::invalid_argument);
}

TEST_CASE("repeated backward is deterministic") {
  Rng rng(3);
  Graph g;
  Value x = g.leaf(random_tensor({4, 3}, rng), true);
  Value w = g.leaf(random_tensor({3, 2}, rng), true);
  Value root = g.mean(g.pow(g.matmul(x, w), 2.0));
  g.backward(root);
  const std::vector<double> first = g.grad(w).values;
  g.backward(root);
  CHECK(g.grad(w).values == first);
}

TEST_CASE("chain rule through smooth compositions") {
  // f(x) = log(c * x^3): df/dx = 3/x.
  Graph g;
  Value x = g.leaf(Tensor::vector({2.0}), true);
  Value root = g.sum(g.log(g.scale(g.pow(x, 3.0), 5.0)));
  g.backward(root);
  CHECK(g.grad(x).values[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("segment op routes gradients back into the flat source") {
  Graph g;
  Value flat = g.leaf(Tensor::vector({1, 2, 3, 4, 5, 6}), true);
  Value m = g.segment(flat, 2, {2, 2});  // [3,4;5,6]
  CHECK(g.value(m).at(1, 1) == 6.0);
  g.backward(g.sum(g.mul(m, m)));
  const auto& grad = g.grad(flat).values;
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);
  CHECK(grad[2] == doctest::Approx(6.0));
  CHECK(grad[5] == doctest::Approx(12.0));
  CHECK_THROWS_AS(g.segment(flat, 4, {2, 2}), std::invalid_argument);
}

TEST_CASE("grad_check on sum of squares is nearly exact") {
  auto builder = [](Graph& g, Value x) { return g.sum(g.mul(x, x)); };
  const auto report = diff::grad_check(builder, Tensor::vector({3.0}), 1e-5, 1e-4);
  CHECK(report.pass());
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("grad_check flags a breakpoint sitting under the probe") {
  auto builder = [](Graph& g, Value x) {
    return g.sum(g.heaviside_pl(x, Temperature(0.2)));
  };
  auto margin = [](const Tensor& x) {
    const double tau = heaviside::tau_avg(x.values);
    double m = 1.0;
    for (double p : x.values) {
      m = std::min(m, heaviside::breakpoint_distance(p, tau, Temperature(0.2)));
    }
    return m;
  };
  // tau_avg = 0.5 and tau_m/2 = 0.25, so 0.75 sits exactly on a breakpoint.
  const auto report =
      diff::grad_check(builder, Tensor::vector({0.75, 0.25}), 1e-5, 1e-4, margin);
  CHECK(report.skipped_near_breakpoint);
  CHECK(report.note == "near-breakpoint, skipped");
  CHECK(!report.pass());
}

TEST_CASE("every op family passes grad_check on random smooth inputs") {
  Rng rng(17);
  const double eps = 1e-5, tol = 1e-4;

  SUBCASE("matmul + add bias + relu + softmax + mean") {
    // Positive weights and inputs keep every pre-activation away from the
    // relu kink so the finite differences stay one-sided.
    const Tensor w = random_tensor({3, 4}, rng, 0.3, 1.0);
    const Tensor mask = random_tensor({2, 4}, rng, 0.5, 1.5);
    auto builder = [&](Graph& g, Value x) {
      Value h = g.add(g.matmul(x, g.constant(w)), g.constant(Tensor::vector({0.1, 0.2, 0.3, 0.4})));
      h = g.dropout_mask(g.relu(h), mask);
      return g.mean(g.softmax_rows(h));
    };
    Tensor x = random_tensor({2, 3}, rng, 0.2, 1.0);
    CHECK(diff::grad_check(builder, x, eps, tol).pass());
  }

  SUBCASE("mul, div, div_guard, scale, add_const") {
    const Tensor b = random_tensor({5}, rng, 0.5, 2.0);
    auto builder = [&](Graph& g, Value x) {
      Value num = g.add_const(g.scale(g.mul(x, x), 1.7), 0.3);
      Value ratio = g.div(num, g.constant(b));
      Value guarded = g.div_guard(ratio, g.sum(g.mul(x, x)), 1e-12);
      return g.sum(guarded);
    };
    CHECK(diff::grad_check(builder, random_tensor({5}, rng, 0.5, 1.5), eps, tol).pass());
  }

  SUBCASE("pow, sqrt, log") {
    auto builder = [](Graph& g, Value x) {
      return g.sum(g.log(g.add_const(g.sqrt(g.pow(x, 2.0)), 0.1)));
    };
    CHECK(diff::grad_check(builder, random_tensor({6}, rng, 0.5, 2.0), eps, tol).pass());
  }

  SUBCASE("scalar broadcast add and mul") {
    auto builder = [](Graph& g, Value x) {
      Value s = g.mean(x);
      return g.sum(g.mul(g.add(x, s), s));
    };
    CHECK(diff::grad_check(builder, random_tensor({4}, rng), eps, tol).pass());
  }

  SUBCASE("l1 normalize rows") {
    auto builder = [](Graph& g, Value x) {
      const Tensor w = Tensor::matrix(2, 3, {0.3, -0.7, 1.1, 0.2, 0.9, -0.4});
      return g.sum(g.mul(g.l1_normalize_rows(x), g.constant(w)));
    };
    CHECK(diff::grad_check(builder, random_tensor({2, 3}, rng, 0.2, 1.0), eps, tol).pass());
  }
}

TEST_CASE("heaviside_pl gradient matches finite differences through softmax") {
  Rng rng(19);
  const Temperature t(0.1);
  const Tensor w = random_tensor({2, 3}, rng);
  auto builder = [&](Graph& g, Value x) {
    Value p = g.softmax_rows(x);
    Value yhat = g.l1_normalize_rows(g.heaviside_pl(p, t));
    return g.sum(g.mul(yhat, g.constant(w)));
  };
  int checked = 0;
  while (checked < 20) {
    Tensor logits = random_tensor({2, 3}, rng, -1.5, 1.5);
    // Screen for comfortable margins from all breakpoints and order ties.
    Graph probe;
    const Tensor& p = probe.value(probe.softmax_rows(probe.constant(logits)));
    double margin = 1.0;
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> row(p.values.begin() + i * 3, p.values.begin() + (i + 1) * 3);
      const double tau = heaviside::tau_avg(row);
      for (double v : row) margin = std::min(margin, heaviside::breakpoint_distance(v, tau, t));
      std::sort(row.begin(), row.end());
      margin = std::min(margin, row[2] - row[1]);
      margin = std::min(margin, row[1] - row[0]);
    }
    if (margin < 1e-3) continue;
    CHECK(diff::grad_check(builder, logits, 1e-6, 1e-4).pass());
    ++checked;
  }
}

TEST_CASE("detach_tau freezes the threshold path") {
  const Temperature t(0.1);
  const Tensor w = Tensor::matrix(1, 3, {1.0, -0.5, 0.25});
  Tensor p = Tensor::matrix(1, 3, {0.62, 0.25, 0.13});

  auto gradient = [&](bool detach) {
    Graph g;
    Value x = g.leaf(p, true);
    Value yhat = g.heaviside_pl(x, t, detach);
    g.backward(g.sum(g.mul(yhat, g.constant(w))));
    return g.grad(x).values;
  };
  const auto with_tau = gradient(false);
  const auto without_tau = gradient(true);
  CHECK(with_tau != without_tau);
  // The non-top-2 coordinate has no threshold contribution either way.
  CHECK(with_tau[2] == doctest::Approx(without_tau[2]).epsilon(1e-12));
}
