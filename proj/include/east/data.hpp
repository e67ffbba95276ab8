// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "east/tensor.hpp"

namespace east::data {

/// Tabular classification dataset. Labels are 1-based class indices.
struct Dataset {
  Tensor features;                       // n x input_dim
  std::vector<int> labels;               // n entries in 1..d
  std::size_t d = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // mapping position k-1 -> class k

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return features.numel() == 0 ? 0 : features.cols(); }
  std::vector<std::size_t> class_counts() const;
};

struct SplitDataset {
  Dataset train, val, test;
};

/// Per-feature standardization statistics fitted on the training split.
/// Standard deviations are floored at 1e-12 before division.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Dataset& train);
  void apply(Dataset& ds) const;
};

/// CSV loader: header row required, comma-separated, '.' decimal point.
/// Distinct label tokens (integers or strings) map to classes 1..d in
/// first-appearance order. Missing values are rejected with the row and
/// column named.
Dataset load_csv(const std::string& path, const std::string& label_column);

void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "label");

/// Stratified 64/16/20 train/val/test split, rounded per class with the
/// remainder going to train. Deterministic given seed.
SplitDataset split(const Dataset& ds, std::uint64_t seed);

/// Fits on train and standardizes all three splits with train statistics.
Standardizer standardize_fit_apply(SplitDataset& splits);

/// Gaussian clusters with unit covariance, one mean per class placed at
/// separation times the class axis in a d-dimensional feature space.
/// Labels are drawn from class_weights.
Dataset gen_synthetic(std::size_t d, std::size_t n, std::span<const double> class_weights,
                      double cluster_separation, std::uint64_t seed);

/// Normalized label entropy H / ln(d) in [0,1]; 1 means perfectly balanced.
double shannon_equitability(std::span<const int> labels, std::size_t d);

}  // namespace east::data
