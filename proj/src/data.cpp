// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "east/rng.hpp"

namespace east::data {

namespace {

constexpr double kStdFloor = 1e-12;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.d = ds.d;
  out.feature_names = ds.feature_names;
  out.class_names = ds.class_names;
  const std::size_t dim = ds.input_dim();
  out.features = Tensor::zeros({idx.size(), dim});
  out.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t j = 0; j < dim; ++j) out.features.at(r, j) = ds.features.at(idx[r], j);
    out.labels.push_back(ds.labels[idx[r]]);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(d, 0);
  for (int y : labels) counts[y - 1]++;
  return counts;
}

Standardizer Standardizer::fit(const Dataset& train) {
  const std::size_t n = train.size(), dim = train.input_dim();
  if (n == 0) throw std::invalid_argument("Standardizer: empty training split");
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += train.features.at(i, j);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double dx = train.features.at(i, j) - s.mean[j];
      s.stddev[j] += dx * dx;
    }
  }
  for (double& v : s.stddev) v = std::max(std::sqrt(v / static_cast<double>(n)), kStdFloor);
  return s;
}

void Standardizer::apply(Dataset& ds) const {
  const std::size_t n = ds.size(), dim = ds.input_dim();
  if (dim != mean.size()) {
    throw std::invalid_argument("Standardizer: fitted on " + std::to_string(mean.size()) +
                                " features, dataset has " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      ds.features.at(i, j) = (ds.features.at(i, j) - mean[j]) / stddev[j];
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path + "' is empty");
  const std::vector<std::string> header = split_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (trim(header[j]) == label_column) {
      label_idx = j;
      break;
    }
  }
  if (label_idx == header.size()) {
    throw std::runtime_error("load_csv: label column '" + label_column + "' not found in '" +
                             path + "'");
  }

  Dataset ds;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_idx) ds.feature_names.push_back(trim(header[j]));
  }

  std::vector<double> values;
  std::unordered_map<std::string, int> class_map;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = trim(cells[j]);
      if (cell.empty()) {
        throw std::runtime_error("load_csv: missing value at row " + std::to_string(row) +
                                 ", column '" + trim(header[j]) + "'");
      }
      if (j == label_idx) {
        auto [it, inserted] = class_map.emplace(cell, static_cast<int>(class_map.size()) + 1);
        if (inserted) ds.class_names.push_back(cell);
        ds.labels.push_back(it->second);
      } else {
        std::size_t pos = 0;
        double v = 0.0;
        try {
          v = std::stod(cell, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != cell.size()) {
          throw std::runtime_error("load_csv: non-numeric feature '" + cell + "' at row " +
                                   std::to_string(row) + ", column '" + trim(header[j]) + "'");
        }
        values.push_back(v);
      }
    }
  }
  if (ds.labels.empty()) throw std::runtime_error("load_csv: '" + path + "' has no data rows");
  ds.d = class_map.size();
  ds.features = Tensor::matrix(ds.labels.size(), ds.feature_names.size(), std::move(values));
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot write '" + path + "'");
  for (const auto& name : ds.feature_names) out << name << ",";
  out << label_column << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.input_dim(); ++j) out << ds.features.at(i, j) << ",";
    if (!ds.class_names.empty()) {
      out << ds.class_names[ds.labels[i] - 1] << "\n";
    } else {
      out << ds.labels[i] << "\n";
    }
  }
}

SplitDataset split(const Dataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n < 10 * ds.d) {
    throw std::invalid_argument("split: need at least " + std::to_string(10 * ds.d) +
                                " examples for d=" + std::to_string(ds.d) + ", got " +
                                std::to_string(n));
  }
  std::vector<std::vector<std::size_t>> per_class(ds.d);
  for (std::size_t i = 0; i < n; ++i) per_class[ds.labels[i] - 1].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  for (std::size_t k = 0; k < ds.d; ++k) {
    auto& idx = per_class[k];
    if (idx.size() < 3) {
      throw std::invalid_argument("split: class " + std::to_string(k + 1) + " has only " +
                                  std::to_string(idx.size()) + " examples, need 3");
    }
    // Fisher-Yates with the shared stream.
    for (std::size_t i = idx.size(); i-- > 1;) {
      std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    }
    const auto nk = static_cast<double>(idx.size());
    std::size_t n_test = static_cast<std::size_t>(std::llround(0.20 * nk));
    std::size_t n_val = static_cast<std::size_t>(std::llround(0.16 * nk));
    // Keep at least one example of every class in train.
    while (n_test + n_val >= idx.size()) {
      if (n_test > 0) {
        --n_test;
      } else {
        --n_val;
      }
    }
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
    val_idx.insert(val_idx.end(), idx.begin() + n_test, idx.begin() + n_test + n_val);
    train_idx.insert(train_idx.end(), idx.begin() + n_test + n_val, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return SplitDataset{subset(ds, train_idx), subset(ds, val_idx), subset(ds, test_idx)};
}

Standardizer standardize_fit_apply(SplitDataset& splits) {
  Standardizer s = Standardizer::fit(splits.train);
  s.apply(splits.train);
  s.apply(splits.val);
  s.apply(splits.test);
  return s;
}

Dataset gen_synthetic(std::size_t d, std::size_t n, std::span<const double> class_weights,
                      double cluster_separation, std::uint64_t seed) {
  if (class_weights.size() != d) {
    throw std::invalid_argument("gen_synthetic: " + std::to_string(class_weights.size()) +
                                " weights for d=" + std::to_string(d));
  }
  double sum = 0.0;
  for (double w : class_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("gen_synthetic: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("gen_synthetic: weights sum to " + std::to_string(sum));
  }
  if (n < 10 * d) {
    throw std::invalid_argument("gen_synthetic: need n >= " + std::to_string(10 * d));
  }

  Dataset ds;
  ds.d = d;
  ds.features = Tensor::zeros({n, d});
  ds.labels.resize(n);
  for (std::size_t j = 0; j < d; ++j) {
    ds.feature_names.push_back("f" + std::to_string(j + 1));
    ds.class_names.push_back(std::to_string(j + 1));
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t k = d - 1;
    for (std::size_t c = 0; c < d; ++c) {
      acc += class_weights[c];
      if (u < acc) {
        k = c;
        break;
      }
    }
    ds.labels[i] = static_cast<int>(k) + 1;
    for (std::size_t j = 0; j < d; ++j) {
      ds.features.at(i, j) = (j == k ? cluster_separation : 0.0) + rng.normal();
    }
  }
  return ds;
}

double shannon_equitability(std::span<const int> labels, std::size_t d) {
  if (d < 2) throw std::invalid_argument("shannon_equitability: need d >= 2");
  if (labels.empty()) throw std::invalid_argument("shannon_equitability: no labels");
  std::vector<double> counts(d, 0.0);
  for (int y : labels) {
    if (y < 1 || static_cast<std::size_t>(y) > d) {
      throw std::invalid_argument("shannon_equitability: label " + std::to_string(y) +
                                  " outside 1.." + std::to_string(d));
    }
    counts[y - 1] += 1.0;
  }
  const auto n = static_cast<double>(labels.size());
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double q = c / n;
      h -= q * std::log(q);
    }
  }
  return h / std::log(static_cast<double>(d));
}

}  // namespace east::data
