// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace east::metrics {

namespace {

constexpr double kGuardEps = 1e-12;
constexpr double kDiceEps = 1e-7;

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

MetricKind metric_kind_from_string(const std::string& name) {
  if (name == "macro_f_beta" || name == "macro_f1" || name == "f1") return MetricKind::kMacroFBeta;
  if (name == "accuracy" || name == "acc") return MetricKind::kAccuracy;
  if (name == "mcc") return MetricKind::kMcc;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMacroFBeta:
      return "macro_f_beta";
    case MetricKind::kAccuracy:
      return "accuracy";
    case MetricKind::kMcc:
      return "mcc";
  }
  return "?";
}

MetricSpec MetricSpec::macro_f1(std::size_t d) {
  return MetricSpec{MetricKind::kMacroFBeta, std::vector<double>(d, 1.0)};
}

MetricSpec MetricSpec::macro_f_beta(std::vector<double> betas) {
  return MetricSpec{MetricKind::kMacroFBeta, std::move(betas)};
}

MetricSpec MetricSpec::accuracy() { return MetricSpec{MetricKind::kAccuracy, {}}; }

MetricSpec MetricSpec::mcc() { return MetricSpec{MetricKind::kMcc, {}}; }

void MetricSpec::validate(std::size_t d) const {
  if (kind != MetricKind::kMacroFBeta) return;
  if (betas.size() != d) {
    throw std::invalid_argument("MetricSpec: " + std::to_string(betas.size()) +
                                " betas for d=" + std::to_string(d));
  }
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("MetricSpec: beta must be positive");
  }
}

std::pair<double, double> precision_recall(const softset::SoftConfusionMatrix& c, std::size_t k) {
  const auto b = softset::binary_cardinalities(c, k);
  return {safe_ratio(b.tp, b.tp + b.fp), safe_ratio(b.tp, b.tp + b.fn)};
}

double f_beta_class(const softset::SoftConfusionMatrix& c, std::size_t k, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("f_beta_class: beta must be positive, got " + std::to_string(beta));
  }
  const auto [p, r] = precision_recall(c, k);
  const double b2 = beta * beta;
  return safe_ratio((1.0 + b2) * p * r, b2 * p + r);
}

double macro_f_beta(const softset::SoftConfusionMatrix& c, std::span<const double> betas) {
  if (betas.size() != c.d) {
    throw std::invalid_argument("macro_f_beta: " + std::to_string(betas.size()) + " betas for d=" +
                                std::to_string(c.d));
  }
  double sum = 0.0;
  for (std::size_t k = 1; k <= c.d; ++k) sum += f_beta_class(c, k, betas[k - 1]);
  return sum / static_cast<double>(c.d);
}

double accuracy(const softset::SoftConfusionMatrix& c) {
  const double total = c.total();
  if (!(total > 0.0)) throw std::invalid_argument("accuracy: zero total mass");
  return c.trace() / total;
}

double mcc(const softset::SoftConfusionMatrix& c) {
  const double total = c.total();
  if (!(total > 0.0)) throw std::invalid_argument("mcc: zero total mass");
  double dot_rc = 0.0, sum_r2 = 0.0, sum_c2 = 0.0;
  for (std::size_t k = 0; k < c.d; ++k) {
    const double r = c.row_sum(k);
    const double col = c.col_sum(k);
    dot_rc += r * col;
    sum_r2 += r * r;
    sum_c2 += col * col;
  }
  const double num = total * c.trace() - dot_rc;
  const double var_r = total * total - sum_r2;
  const double var_c = total * total - sum_c2;
  if (var_r <= 0.0 || var_c <= 0.0) return 0.0;
  return num / std::sqrt(var_r * var_c);
}

double evaluate(const MetricSpec& spec, const softset::SoftConfusionMatrix& c) {
  spec.validate(c.d);
  switch (spec.kind) {
    case MetricKind::kMacroFBeta:
      return macro_f_beta(c, spec.betas);
    case MetricKind::kAccuracy:
      return accuracy(c);
    case MetricKind::kMcc:
      return mcc(c);
  }
  throw std::logic_error("evaluate: unhandled metric kind");
}

double loss_from_metric(MetricKind kind, double metric_value) {
  return kind == MetricKind::kMcc ? 0.5 * (1.0 - metric_value) : 1.0 - metric_value;
}

namespace {

// Scalar node: sum of C masked to one entry/row/column.
diff::Value masked_sum(diff::Graph& g, diff::Value c, std::size_t d,
                       const std::vector<double>& mask) {
  return g.sum(g.mul(c, g.constant(Tensor::matrix(d, d, mask))));
}

diff::Value macro_f_beta_node(diff::Graph& g, diff::Value c, std::size_t d,
                              std::span<const double> betas) {
  diff::Value acc;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> diag_mask(d * d, 0.0), row_mask(d * d, 0.0), col_mask(d * d, 0.0);
    diag_mask[k * d + k] = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      row_mask[k * d + j] = 1.0;
      col_mask[j * d + k] = 1.0;
    }
    diff::Value tp = masked_sum(g, c, d, diag_mask);
    diff::Value row = masked_sum(g, c, d, row_mask);
    diff::Value col = masked_sum(g, c, d, col_mask);
    // F_beta = (1+b^2) tp / (b^2 (tp+fn) + (tp+fp)) = (1+b^2) tp / (b^2 row + col).
    const double b2 = betas[k] * betas[k];
    diff::Value num = g.scale(tp, 1.0 + b2);
    diff::Value den = g.add(g.scale(row, b2), col);
    diff::Value fk = g.div_guard(num, den, kGuardEps);
    acc = k == 0 ? fk : g.add(acc, fk);
  }
  return g.scale(acc, 1.0 / static_cast<double>(d));
}

diff::Value accuracy_node(diff::Graph& g, diff::Value c, std::size_t d) {
  std::vector<double> diag(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) diag[k * d + k] = 1.0;
  return g.div_guard(masked_sum(g, c, d, diag), g.sum(c), kGuardEps);
}

diff::Value mcc_node(diff::Graph& g, diff::Value c, std::size_t d) {
  std::vector<double> diag(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) diag[k * d + k] = 1.0;
  diff::Value total = g.sum(c);
  diff::Value trace = masked_sum(g, c, d, diag);
  diff::Value rows = g.matmul(c, g.constant(Tensor::matrix(d, 1, std::vector<double>(d, 1.0))));
  diff::Value cols = g.matmul(g.constant(Tensor::matrix(1, d, std::vector<double>(d, 1.0))), c);
  diff::Value dot_rc = g.matmul(cols, rows);              // 1x1 = sum_k rowsum_k * colsum_k
  diff::Value num = g.sub(g.mul(total, trace), g.sum(dot_rc));
  diff::Value total_sq = g.pow(total, 2.0);
  diff::Value var_r = g.sub(total_sq, g.sum(g.mul(rows, rows)));
  diff::Value var_c = g.sub(total_sq, g.sum(g.mul(cols, cols)));
  return g.div_guard(num, g.sqrt(g.mul(var_r, var_c)), kGuardEps);
}

}  // namespace

diff::Value surrogate_loss(diff::Graph& g, const MetricSpec& spec, diff::Value confusion,
                           std::size_t d) {
  spec.validate(d);
  const Tensor& cv = g.value(confusion);
  if (cv.rank() != 2 || cv.rows() != d || cv.cols() != d) {
    throw std::invalid_argument("surrogate_loss: expected a " + std::to_string(d) + "x" +
                                std::to_string(d) + " confusion node, got " + cv.shape_str());
  }
  switch (spec.kind) {
    case MetricKind::kMacroFBeta:
      return g.add_const(g.scale(macro_f_beta_node(g, confusion, d, spec.betas), -1.0), 1.0);
    case MetricKind::kAccuracy:
      return g.add_const(g.scale(accuracy_node(g, confusion, d), -1.0), 1.0);
    case MetricKind::kMcc:
      return g.add_const(g.scale(mcc_node(g, confusion, d), -0.5), 0.5);
  }
  throw std::logic_error("surrogate_loss: unhandled metric kind");
}

double cross_entropy(const double* probs, std::span<const int> labels, std::size_t d) {
  if (labels.empty()) throw std::invalid_argument("cross_entropy: empty batch");
  double sum = 0.0;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const double p = probs[e * d + (labels[e] - 1)];
    sum -= std::log(std::max(p, 1e-12));
  }
  return sum / static_cast<double>(labels.size());
}

diff::Value cross_entropy_loss(diff::Graph& g, diff::Value probs, std::span<const int> labels) {
  const Tensor& p = g.value(probs);
  const std::size_t n = p.rows(), d = p.cols();
  if (labels.size() != n) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(n));
  }
  std::vector<double> onehot(n * d, 0.0);
  for (std::size_t e = 0; e < n; ++e) onehot[e * d + (labels[e] - 1)] = 1.0;
  diff::Value picked = g.mul(g.log(probs), g.constant(Tensor::matrix(n, d, std::move(onehot))));
  return g.scale(g.sum(picked), -1.0 / static_cast<double>(n));
}

double dice_loss(const double* probs, std::span<const int> labels, std::size_t n, std::size_t d) {
  if (n == 0) throw std::invalid_argument("dice_loss: empty batch");
  double mean_dice = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double overlap = 0.0, psum = 0.0, ysum = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      const double p = probs[e * d + k];
      psum += p;
      if (static_cast<std::size_t>(labels[e] - 1) == k) {
        ysum += 1.0;
        overlap += p;
      }
    }
    mean_dice += (2.0 * overlap + kDiceEps) / (psum + ysum + kDiceEps);
  }
  return 1.0 - mean_dice / static_cast<double>(d);
}

diff::Value dice_loss_graph(diff::Graph& g, diff::Value probs, std::span<const int> labels) {
  const Tensor& p = g.value(probs);
  const std::size_t n = p.rows(), d = p.cols();
  if (labels.size() != n) {
    throw std::invalid_argument("dice_loss: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(n));
  }
  diff::Value acc;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> col_mask(n * d, 0.0), hit_mask(n * d, 0.0);
    double ysum = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      col_mask[e * d + k] = 1.0;
      if (static_cast<std::size_t>(labels[e] - 1) == k) {
        hit_mask[e * d + k] = 1.0;
        ysum += 1.0;
      }
    }
    diff::Value overlap = g.sum(g.mul(probs, g.constant(Tensor::matrix(n, d, std::move(hit_mask)))));
    diff::Value psum = g.sum(g.mul(probs, g.constant(Tensor::matrix(n, d, std::move(col_mask)))));
    diff::Value num = g.add_const(g.scale(overlap, 2.0), kDiceEps);
    diff::Value den = g.add_const(psum, ysum + kDiceEps);
    diff::Value dice_k = g.div(num, den);
    acc = k == 0 ? dice_k : g.add(acc, dice_k);
  }
  return g.add_const(g.scale(acc, -1.0 / static_cast<double>(d)), 1.0);
}

}  // namespace east::metrics
