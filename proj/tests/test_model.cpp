// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/model.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <vector>

#include "east/metrics.hpp"
#include "east/rng.hpp"

using namespace east;
using namespace east::model;

TEST_CASE("init builds the standard tabular stack deterministically") {
  const MlpParams a = init(3, 2, 0.25, 42);
  const MlpParams b = init(3, 2, 0.25, 42);
  const MlpParams c = init(3, 2, 0.25, 43);

  REQUIRE(a.layer_count() == 4);
  CHECK(a.weights[0].shape == std::vector<std::size_t>{3, 512});
  CHECK(a.weights[1].shape == std::vector<std::size_t>{512, 256});
  CHECK(a.weights[2].shape == std::vector<std::size_t>{256, 128});
  CHECK(a.weights[3].shape == std::vector<std::size_t>{128, 2});

  CHECK(a.weights[0].values == b.weights[0].values);
  CHECK(a.weights[3].values == b.weights[3].values);
  CHECK(a.weights[0].values != c.weights[0].values);

  for (const auto& bias : a.biases) {
    for (double v : bias.values) CHECK(v == 0.0);
  }
  // Fan-in scaled bounds.
  const double bound0 = std::sqrt(1.0 / 3.0);
  for (double v : a.weights[0].values) CHECK(std::abs(v) <= bound0);

  CHECK_THROWS_AS(init(0, 2, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(init(3, 1, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(init(3, 2, 1.0, 1), std::invalid_argument);
}

TEST_CASE("zero parameters give a uniform distribution") {
  MlpParams p = init_custom(3, {4}, 5, 0.0, 1);
  for (auto& w : p.weights) w.values.assign(w.values.size(), 0.0);
  Rng rng(0);
  const Tensor probs = forward(p, Tensor::matrix(2, 3, {1, 2, 3, -1, 0, 4}), false, rng);
  for (double v : probs.values) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("eval mode ignores the rng and is bit-deterministic") {
  const MlpParams p = init_custom(4, {8, 6}, 3, 0.5, 7);
  const Tensor x = Tensor::matrix(3, 4, {0.1, -0.2, 0.3, 0.4, 1, 2, 3, 4, -1, -2, -3, -4});
  Rng r1(111), r2(999);
  const Tensor a = forward(p, x, false, r1);
  const Tensor b = forward(p, x, false, r2);
  CHECK(a.values == b.values);
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  Rng rng(5);
  MlpParams p = init_custom(3, {6}, 4, 0.0, 9);
  Tensor x = Tensor::zeros({5, 3});
  for (double& v : x.values) v = rng.uniform(-2.0, 2.0);
  Rng r0(0);
  const Tensor probs = forward(p, x, false, r0);
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) sum += probs.at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Shifting every output logit by a constant (via the final bias) leaves
  // the probabilities unchanged.
  MlpParams shifted = p;
  for (double& v : shifted.biases.back().values) v += 3.7;
  const Tensor probs2 = forward(shifted, x, false, r0);
  for (std::size_t i = 0; i < probs.numel(); ++i) {
    CHECK(probs.values[i] == doctest::Approx(probs2.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("train mode applies inverted dropout") {
  MlpParams p = init_custom(2, {64}, 2, 0.5, 3);
  const Tensor x = Tensor::matrix(1, 2, {1.0, -1.0});
  Rng rng(12);
  const Tensor with_dropout = forward(p, x, true, rng);
  Rng rng2(12);
  const Tensor again = forward(p, x, true, rng2);
  CHECK(with_dropout.values == again.values);  // same stream, same masks

  Rng rng3(13);
  const Tensor other = forward(p, x, true, rng3);
  CHECK(with_dropout.values != other.values);

  // Masks sampled for a large layer keep roughly keep_prob of the units.
  Rng mask_rng(99);
  const auto masks = sample_dropout_masks(p, 64, mask_rng);
  REQUIRE(masks.size() == 1);
  std::size_t kept = 0;
  for (double v : masks[0].values) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0)));
    if (v != 0.0) ++kept;
  }
  const double frac = static_cast<double>(kept) / static_cast<double>(masks[0].numel());
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
}

TEST_CASE("forward validates the input width") {
  const MlpParams p = init_custom(3, {4}, 2, 0.0, 1);
  Rng rng(0);
  CHECK_THROWS_AS(forward(p, Tensor::matrix(1, 2, {1, 2}), false, rng), std::invalid_argument);
}

TEST_CASE("graph forward equals the plain forward in eval mode") {
  const MlpParams p = init_custom(3, {8, 5}, 3, 0.0, 21);
  Rng rng(4);
  Tensor x = Tensor::zeros({6, 3});
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  Rng r0(0);
  const Tensor plain = forward(p, x, false, r0);
  diff::Graph g;
  const ParamNodes nodes = make_param_nodes(g, p);
  const Tensor& graphed = g.value(forward_graph(g, nodes, x, {}));
  REQUIRE(plain.numel() == graphed.numel());
  for (std::size_t i = 0; i < plain.numel(); ++i) {
    CHECK(plain.values[i] == doctest::Approx(graphed.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy through the model passes grad_check") {
  const MlpParams shape = init_custom(3, {6, 4}, 3, 0.0, 31);
  Rng rng(32);
  Tensor x = Tensor::zeros({5, 3});
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  const std::vector<int> labels{1, 2, 3, 1, 2};

  auto builder = [&](diff::Graph& g, diff::Value flat) {
    std::size_t off = 0;
    diff::Value h = g.constant(x);
    for (std::size_t l = 0; l < shape.layer_count(); ++l) {
      const std::size_t fi = shape.weights[l].rows(), fo = shape.weights[l].cols();
      diff::Value w = g.segment(flat, off, {fi, fo});
      off += fi * fo;
      diff::Value b = g.segment(flat, off, {fo});
      off += fo;
      h = g.add(g.matmul(h, w), b);
      if (l + 1 < shape.layer_count()) h = g.relu(h);
    }
    return metrics::cross_entropy_loss(g, g.softmax_rows(h), labels);
  };
  const Tensor flat = Tensor::vector(flatten_parameters(shape));
  const auto report = diff::grad_check(builder, flat, 1e-5, 1e-4);
  CHECK(report.pass());
}

TEST_CASE("checkpoint round trip preserves every parameter") {
  const MlpParams p = init_custom(4, {8, 6}, 3, 0.25, 77);
  const std::string path = "test_checkpoint_roundtrip.json";
  save_checkpoint(p, path);
  const MlpParams q = load_checkpoint(path);
  CHECK(q.input_dim == p.input_dim);
  CHECK(q.d == p.d);
  CHECK(q.hidden == p.hidden);
  CHECK(q.dropout == p.dropout);
  CHECK(q.seed == p.seed);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    CHECK(q.weights[l].values == p.weights[l].values);
    CHECK(q.biases[l].values == p.biases[l].values);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint("no_such_checkpoint.json"), std::runtime_error);
}
