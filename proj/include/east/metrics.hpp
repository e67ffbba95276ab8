// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "east/graph.hpp"
#include "east/softset.hpp"

namespace east::metrics {

enum class MetricKind { kMacroFBeta, kAccuracy, kMcc };

MetricKind metric_kind_from_string(const std::string& name);
std::string to_string(MetricKind kind);

/// Which evaluation metric to surrogate. For macro F_beta, one beta per
/// class; beta > 1 weights recall over precision, beta < 1 the reverse.
struct MetricSpec {
  MetricKind kind = MetricKind::kMacroFBeta;
  std::vector<double> betas;  // macro F_beta only; length d

  static MetricSpec macro_f1(std::size_t d);
  static MetricSpec macro_f_beta(std::vector<double> betas);
  static MetricSpec accuracy();
  static MetricSpec mcc();

  void validate(std::size_t d) const;
};

/// (precision, recall) for class k (1-based); 0/0 ratios evaluate to 0.
std::pair<double, double> precision_recall(const softset::SoftConfusionMatrix& c, std::size_t k);

/// F_beta for class k: (1+beta^2) P R / (beta^2 P + R), 0 when the
/// denominator vanishes.
double f_beta_class(const softset::SoftConfusionMatrix& c, std::size_t k, double beta);

/// Unweighted mean of per-class F_beta, class k using betas[k-1].
double macro_f_beta(const softset::SoftConfusionMatrix& c, std::span<const double> betas);

double accuracy(const softset::SoftConfusionMatrix& c);

/// Multiclass MCC (the R_K statistic); reduces to the binary formula at
/// d = 2. 0 when either variance factor vanishes.
double mcc(const softset::SoftConfusionMatrix& c);

/// Metric dispatched by spec, on any (hard or soft) confusion matrix.
double evaluate(const MetricSpec& spec, const softset::SoftConfusionMatrix& c);

/// Loss mapping: 1 - M for macro F_beta and accuracy, (1 - M)/2 for MCC,
/// so the loss lives in [0,1] and minimizing it maximizes the metric.
double loss_from_metric(MetricKind kind, double metric_value);

/// Graph-side surrogate loss from a d x d confusion-matrix node built from
/// soft predictions. Same formulas as the scalar path, assembled from
/// differentiable ops.
diff::Value surrogate_loss(diff::Graph& g, const MetricSpec& spec, diff::Value confusion,
                           std::size_t d);

/// Mean over the batch of -log p_y, with p_y clamped at 1e-12.
double cross_entropy(const double* probs, std::span<const int> labels, std::size_t d);
/// Graph form; probs is an n x d node, labels are 1-based.
diff::Value cross_entropy_loss(diff::Graph& g, diff::Value probs, std::span<const int> labels);

/// Smoothed soft-Dice loss on raw probabilities: 1 - mean_k of
/// (2 sum p_k y_k + eps) / (sum p_k + sum y_k + eps), eps = 1e-7.
double dice_loss(const double* probs, std::span<const int> labels, std::size_t n, std::size_t d);
diff::Value dice_loss_graph(diff::Graph& g, diff::Value probs, std::span<const int> labels);

}  // namespace east::metrics
