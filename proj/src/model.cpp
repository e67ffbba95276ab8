// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace east::model {

namespace {

constexpr const char* kCheckpointVersion = "east-mlp-v1";

void validate_dims(std::size_t input_dim, std::size_t d, double dropout) {
  if (input_dim < 1) throw std::invalid_argument("init: input_dim must be >= 1");
  if (d < 2) throw std::invalid_argument("init: need at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("init: dropout " + std::to_string(dropout) + " outside [0,1)");
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].numel() + biases[l].numel();
  return n;
}

MlpParams init(std::size_t input_dim, std::size_t d, double dropout, std::uint64_t seed) {
  return init_custom(input_dim, {512, 256, 128}, d, dropout, seed);
}

MlpParams init_custom(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t d,
                      double dropout, std::uint64_t seed) {
  validate_dims(input_dim, d, dropout);
  MlpParams p;
  p.input_dim = input_dim;
  p.d = d;
  p.hidden = std::move(hidden);
  p.dropout = dropout;
  p.seed = seed;

  Rng rng(seed);
  std::size_t fan_in = input_dim;
  std::vector<std::size_t> outs = p.hidden;
  outs.push_back(d);
  for (std::size_t out : outs) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    Tensor w = Tensor::zeros({fan_in, out});
    for (double& v : w.values) v = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Tensor::zeros({out}));
    fan_in = out;
  }
  return p;
}

Tensor forward(const MlpParams& params, const Tensor& x, bool train_mode, Rng& rng) {
  if (x.cols() != params.input_dim) {
    throw std::invalid_argument("forward: input width " + std::to_string(x.cols()) +
                                " does not match input_dim " + std::to_string(params.input_dim));
  }
  const bool use_dropout = train_mode && params.dropout > 0.0;
  const double keep = 1.0 - params.dropout;
  Tensor h = x;
  if (h.rank() == 1) h.shape = {1, h.numel()};
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    Tensor z = matmul(h, params.weights[l]);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += params.biases[l].values[j];
    if (l + 1 < params.layer_count()) {
      for (double& v : z.values) v = v > 0.0 ? v : 0.0;
      if (use_dropout) {
        for (double& v : z.values) v = rng.uniform() < keep ? v / keep : 0.0;
      }
    }
    h = std::move(z);
  }
  // Row-wise softmax with max-subtraction.
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double* row = h.values.data() + i * h.cols();
    double mx = row[0];
    for (std::size_t j = 1; j < h.cols(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < h.cols(); ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < h.cols(); ++j) row[j] /= sum;
  }
  return h;
}

ParamNodes make_param_nodes(diff::Graph& g, const MlpParams& params) {
  ParamNodes nodes;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    nodes.weights.push_back(g.leaf(params.weights[l], true));
    nodes.biases.push_back(g.leaf(params.biases[l], true));
  }
  return nodes;
}

std::vector<Tensor> sample_dropout_masks(const MlpParams& params, std::size_t batch_rows,
                                         Rng& rng) {
  std::vector<Tensor> masks;
  if (params.dropout <= 0.0) return masks;
  const double keep = 1.0 - params.dropout;
  for (std::size_t l = 0; l + 1 < params.layer_count(); ++l) {
    Tensor m = Tensor::zeros({batch_rows, params.weights[l].cols()});
    for (double& v : m.values) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

diff::Value forward_graph(diff::Graph& g, const ParamNodes& nodes, const Tensor& x,
                          const std::vector<Tensor>& dropout_masks) {
  diff::Value h = g.constant(x);
  const std::size_t layers = nodes.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    diff::Value z = g.add(g.matmul(h, nodes.weights[l]), nodes.biases[l]);
    if (l + 1 < layers) {
      z = g.relu(z);
      if (!dropout_masks.empty()) z = g.dropout_mask(z, dropout_masks[l]);
    }
    h = z;
  }
  return g.softmax_rows(h);
}

std::vector<double> flatten_parameters(const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(params.parameter_count());
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    flat.insert(flat.end(), params.weights[l].values.begin(), params.weights[l].values.end());
    flat.insert(flat.end(), params.biases[l].values.begin(), params.biases[l].values.end());
  }
  return flat;
}

void unflatten_parameters(MlpParams& params, std::span<const double> flat) {
  if (flat.size() != params.parameter_count()) {
    throw std::invalid_argument("unflatten_parameters: got " + std::to_string(flat.size()) +
                                " values for " + std::to_string(params.parameter_count()) +
                                " parameters");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    for (double& v : params.weights[l].values) v = flat[off++];
    for (double& v : params.biases[l].values) v = flat[off++];
  }
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
  nlohmann::json doc;
  doc["version"] = kCheckpointVersion;
  doc["input_dim"] = params.input_dim;
  doc["d"] = params.d;
  doc["hidden"] = params.hidden;
  doc["dropout"] = params.dropout;
  doc["seed"] = params.seed;
  doc["parameters"] = flatten_parameters(params);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
  out << doc.dump();
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot read " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("version", "") != kCheckpointVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version '" +
                             doc.value("version", std::string("<missing>")) + "'");
  }
  MlpParams p = init_custom(doc.at("input_dim").get<std::size_t>(),
                            doc.at("hidden").get<std::vector<std::size_t>>(),
                            doc.at("d").get<std::size_t>(), doc.at("dropout").get<double>(),
                            doc.at("seed").get<std::uint64_t>());
  unflatten_parameters(p, doc.at("parameters").get<std::vector<double>>());
  return p;
}

}  // namespace east::model
