// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "east/graph.hpp"
#include "east/rng.hpp"
#include "east/tensor.hpp"

namespace east::model {

/// Fully-connected classifier parameters: affine layers with ReLU and
/// dropout after every hidden layer, a linearly activated output layer,
/// and a row-wise softmax on top. init() builds the 512/256/128 tabular
/// stack; other widths are available for harnesses that need a small
/// network.
struct MlpParams {
  std::size_t input_dim = 0;
  std::size_t d = 0;                  // output classes
  std::vector<std::size_t> hidden;    // hidden layer widths
  std::vector<Tensor> weights;        // per layer, (fan_in x fan_out)
  std::vector<Tensor> biases;         // per layer, (fan_out)
  double dropout = 0.0;
  std::uint64_t seed = 0;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

/// The standard tabular stack: input -> 512 -> 256 -> 128 -> d.
MlpParams init(std::size_t input_dim, std::size_t d, double dropout, std::uint64_t seed);

/// Same initialization scheme with explicit hidden widths.
MlpParams init_custom(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t d,
                      double dropout, std::uint64_t seed);

/// Softmax probabilities for a batch (rows of x). In train mode, inverted
/// dropout masks are drawn from rng after each hidden activation; in eval
/// mode rng is untouched.
Tensor forward(const MlpParams& params, const Tensor& x, bool train_mode, Rng& rng);

/// Graph handles for the parameter tensors of one optimization step.
struct ParamNodes {
  std::vector<diff::Value> weights;
  std::vector<diff::Value> biases;
};
ParamNodes make_param_nodes(diff::Graph& g, const MlpParams& params);

/// Pre-sampled inverted-dropout masks for each hidden activation; empty
/// when dropout is 0.
std::vector<Tensor> sample_dropout_masks(const MlpParams& params, std::size_t batch_rows, Rng& rng);

/// Differentiable forward pass; masks may be empty for the eval path.
diff::Value forward_graph(diff::Graph& g, const ParamNodes& nodes, const Tensor& x,
                          const std::vector<Tensor>& dropout_masks);

/// Flatten/restore all parameters; layout is weights then bias per layer.
std::vector<double> flatten_parameters(const MlpParams& params);
void unflatten_parameters(MlpParams& params, std::span<const double> flat);

/// Checkpoint document (version "east-mlp-v1").
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace east::model
