// Copyright (c) 2026 EAST Contributors
// SPDX-License-Identifier: Apache-2.0

#include "east/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace east::diff {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kL1Floor = 1e-12;
constexpr double kSqrtSlack = -1e-9;

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(op + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

Value Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Value{nodes_.size() - 1};
}

const Graph::Node& Graph::node(Value v) const {
  if (v.id >= nodes_.size()) throw std::invalid_argument("Graph: invalid node handle");
  return nodes_[v.id];
}

const Tensor& Graph::value(Value v) const { return node(v).value; }

Value Graph::leaf(Tensor t, bool requires_grad) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(t);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Value Graph::constant(Tensor t) { return leaf(std::move(t), false); }

Value Graph::matmul(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kMatMul;
  n.in0 = a.id;
  n.in1 = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = east::matmul(na.value, nb.value);
  return push(std::move(n));
}

Value Graph::add(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kAdd;
  n.in0 = a.id;
  n.in1 = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  const Tensor& ta = na.value;
  const Tensor& tb = nb.value;
  if (ta.same_shape(tb)) {
    n.value = ta;
    for (std::size_t i = 0; i < tb.numel(); ++i) n.value.values[i] += tb.values[i];
  } else if (tb.is_scalar()) {
    n.value = ta;
    for (double& v : n.value.values) v += tb.values[0];
  } else if (ta.is_scalar()) {
    n.value = tb;
    for (double& v : n.value.values) v += ta.values[0];
  } else if (ta.rank() == 2 && tb.numel() == ta.cols()) {
    // Row-broadcast bias.
    n.value = ta;
    for (std::size_t i = 0; i < ta.rows(); ++i)
      for (std::size_t j = 0; j < ta.cols(); ++j) n.value.at(i, j) += tb.values[j];
  } else {
    shape_error("add", ta, tb);
  }
  return push(std::move(n));
}

Value Graph::sub(Value a, Value b) { return add(a, scale(b, -1.0)); }

Value Graph::mul(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.op = Op::kMul;
  n.in0 = a.id;
  n.in1 = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  const Tensor& ta = na.value;
  const Tensor& tb = nb.value;
  if (ta.same_shape(tb)) {
    n.value = ta;
    for (std::size_t i = 0; i < tb.numel(); ++i) n.value.values[i] *= tb.values[i];
  } else if (tb.is_scalar()) {
    n.value = ta;
    for (double& v : n.value.values) v *= tb.values[0];
  } else if (ta.is_scalar()) {
    n.value = tb;
    for (double& v : n.value.values) v *= ta.values[0];
  } else {
    shape_error("multiply", ta, tb);
  }
  return push(std::move(n));
}

Value Graph::div(Value a, Value b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  for (double v : nb.value.values) {
    if (v == 0.0) {
      throw std::runtime_error("divide: zero denominator entry; use div_guard for a floored divide");
    }
  }
  Node n;
  n.op = Op::kDiv;
  n.in0 = a.id;
  n.in1 = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  const Tensor& ta = na.value;
  const Tensor& tb = nb.value;
  if (ta.same_shape(tb)) {
    n.value = ta;
    for (std::size_t i = 0; i < tb.numel(); ++i) n.value.values[i] /= tb.values[i];
  } else if (tb.is_scalar()) {
    n.value = ta;
    for (double& v : n.value.values) v /= tb.values[0];
  } else if (ta.is_scalar()) {
    n.value = Tensor::full(tb.shape, ta.values[0]);
    for (std::size_t i = 0; i < tb.numel(); ++i) n.value.values[i] /= tb.values[i];
  } else {
    shape_error("divide", ta, tb);
  }
  return push(std::move(n));
}

Value Graph::div_guard(Value a, Value b, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("div_guard: eps must be positive");
  const Node& na = node(a);
  const Node& nb = node(b);
  const Tensor& ta = na.value;
  const Tensor& tb = nb.value;
  if (!ta.same_shape(tb) && !tb.is_scalar()) shape_error("div_guard", ta, tb);
  Node n;
  n.op = Op::kDivGuard;
  n.in0 = a.id;
  n.in1 = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.c0 = eps;
  n.value = ta;
  for (std::size_t i = 0; i < ta.numel(); ++i) {
    const double den = tb.is_scalar() ? tb.values[0] : tb.values[i];
    n.value.values[i] /= std::max(den, eps);
  }
  return push(std::move(n));
}

Value Graph::scale(Value a, double c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kScale;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.c0 = c;
  n.value = na.value;
  for (double& v : n.value.values) v *= c;
  return push(std::move(n));
}

Value Graph::add_const(Value a, double c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kAddConst;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.c0 = c;
  n.value = na.value;
  for (double& v : n.value.values) v += c;
  return push(std::move(n));
}

Value Graph::relu(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kRelu;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (double& v : n.value.values) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Value Graph::dropout_mask(Value a, Tensor mask) {
  const Node& na = node(a);
  if (!na.value.same_shape(mask)) shape_error("dropout_mask", na.value, mask);
  Node n;
  n.op = Op::kDropoutMask;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (std::size_t i = 0; i < mask.numel(); ++i) n.value.values[i] *= mask.values[i];
  n.aux = std::move(mask);
  return push(std::move(n));
}

Value Graph::softmax_rows(Value a) {
  const Node& na = node(a);
  const Tensor& x = na.value;
  const std::size_t rows = x.rows(), cols = x.cols();
  Node n;
  n.op = Op::kSoftmaxRows;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = x;
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = n.value.values.data() + i * cols;
    double mx = row[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < cols; ++j) row[j] /= sum;
  }
  return push(std::move(n));
}

Value Graph::sum(Value a) {
  const Node& na = node(a);
  double s = 0.0;
  for (double v : na.value.values) s += v;
  Node n;
  n.op = Op::kSum;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

Value Graph::mean(Value a) {
  const Node& na = node(a);
  if (na.value.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  double s = 0.0;
  for (double v : na.value.values) s += v;
  Node n;
  n.op = Op::kMean;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = Tensor::scalar(s / static_cast<double>(na.value.numel()));
  return push(std::move(n));
}

Value Graph::pow(Value a, double exponent) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kPow;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.c0 = exponent;
  n.value = na.value;
  for (double& v : n.value.values) {
    v = std::pow(v, exponent);
    if (!std::isfinite(v)) throw std::runtime_error("power: non-finite result");
  }
  return push(std::move(n));
}

Value Graph::sqrt(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kSqrt;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (double& v : n.value.values) {
    if (v < kSqrtSlack) throw std::runtime_error("sqrt: negative argument " + std::to_string(v));
    v = std::sqrt(std::max(v, 0.0));
  }
  return push(std::move(n));
}

Value Graph::log(Value a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kLog;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (double& v : n.value.values) v = std::log(std::max(v, kLogFloor));
  return push(std::move(n));
}

Value Graph::heaviside_pl(Value p_rows, heaviside::Temperature t, bool detach_tau) {
  const Node& na = node(p_rows);
  const Tensor& x = na.value;
  const std::size_t rows = x.rows(), cols = x.cols();
  Node n;
  n.op = Op::kHeavisidePl;
  n.in0 = p_rows.id;
  n.requires_grad = na.requires_grad;
  n.c0 = t.value();
  n.flag = detach_tau;
  n.value = x;
  n.aux = Tensor::zeros({rows, 2 * cols});
  n.aux_idx.resize(2 * rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::span<const double> row(x.values.data() + i * cols, cols);
    std::size_t i1, i2;
    heaviside::top2(row, i1, i2);
    const double tau = heaviside::tau_avg(row);
    n.aux_idx[2 * i] = i1;
    n.aux_idx[2 * i + 1] = i2;
    for (std::size_t j = 0; j < cols; ++j) {
      n.value.values[i * cols + j] = heaviside::heaviside_linear(row[j], tau, t);
      const auto g = heaviside::heaviside_linear_grad(row[j], tau, t);
      n.aux.values[i * 2 * cols + j] = g.dp;
      n.aux.values[i * 2 * cols + cols + j] = g.dtau;
    }
  }
  return push(std::move(n));
}

Value Graph::l1_normalize_rows(Value a) {
  const Node& na = node(a);
  const Tensor& x = na.value;
  const std::size_t rows = x.rows(), cols = x.cols();
  Node n;
  n.op = Op::kL1NormalizeRows;
  n.in0 = a.id;
  n.requires_grad = na.requires_grad;
  n.value = x;
  n.aux = Tensor::zeros({rows});
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += x.values[i * cols + j];
    if (s < kL1Floor) {
      throw std::runtime_error("l1_normalize: row " + std::to_string(i) + " norm " +
                               std::to_string(s) + " below 1e-12");
    }
    n.aux.values[i] = s;
    for (std::size_t j = 0; j < cols; ++j) n.value.values[i * cols + j] /= s;
  }
  return push(std::move(n));
}

Value Graph::segment(Value flat, std::size_t offset, std::vector<std::size_t> shape) {
  const Node& na = node(flat);
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  if (offset + count > na.value.numel()) {
    throw std::invalid_argument("segment: range [" + std::to_string(offset) + ", " +
                                std::to_string(offset + count) + ") exceeds source " +
                                na.value.shape_str());
  }
  Node n;
  n.op = Op::kSegment;
  n.in0 = flat.id;
  n.requires_grad = na.requires_grad;
  n.aux_idx = {offset};
  n.value = Tensor(std::move(shape),
                   std::vector<double>(na.value.values.begin() + offset,
                                       na.value.values.begin() + offset + count));
  return push(std::move(n));
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (n.adjoint.numel() != g.numel()) {
    throw std::logic_error("Graph: adjoint size mismatch for node " + std::to_string(id));
  }
  for (std::size_t i = 0; i < g.numel(); ++i) n.adjoint.values[i] += g.values[i];
}

void Graph::backward(Value root) {
  const Node& r = node(root);
  if (!r.value.is_scalar()) {
    throw std::invalid_argument("backward: root must be scalar, got " + r.value.shape_str());
  }
  // Mark the subgraph below the root.
  std::vector<bool> reachable(nodes_.size(), false);
  std::vector<std::size_t> stack{root.id};
  reachable[root.id] = true;
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    for (std::size_t in : {nodes_[id].in0, nodes_[id].in1}) {
      if (in != kNone && !reachable[in]) {
        reachable[in] = true;
        stack.push_back(in);
      }
    }
  }
  // Zero-initialize adjoints before every pass, so repeated backward calls
  // are deterministic.
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    nodes_[id].adjoint = reachable[id] ? Tensor::zeros(nodes_[id].value.shape) : Tensor();
  }
  nodes_[root.id].adjoint.values[0] = 1.0;
  // Node ids are already topologically ordered (inputs precede uses), so a
  // reverse scan visits each node exactly once with its adjoint complete.
  for (std::size_t id = root.id + 1; id-- > 0;) {
    if (reachable[id]) backward_node(id);
  }
}

void Graph::backward_node(std::size_t id) {
  Node& n = nodes_[id];
  if (n.op == Op::kLeaf) return;
  const Tensor& g = n.adjoint;
  const Tensor& a = nodes_[n.in0].value;

  switch (n.op) {
    case Op::kMatMul: {
      const Tensor& b = nodes_[n.in1].value;
      accumulate(n.in0, matmul_nt(g, b));
      accumulate(n.in1, matmul_tn(a, g));
      break;
    }
    case Op::kAdd: {
      const Tensor& b = nodes_[n.in1].value;
      if (a.same_shape(b)) {
        accumulate(n.in0, g);
        accumulate(n.in1, g);
      } else if (b.is_scalar()) {
        accumulate(n.in0, g);
        double s = 0.0;
        for (double v : g.values) s += v;
        accumulate(n.in1, Tensor::scalar(s));
      } else if (a.is_scalar()) {
        accumulate(n.in1, g);
        double s = 0.0;
        for (double v : g.values) s += v;
        accumulate(n.in0, Tensor::scalar(s));
      } else {
        // Row-broadcast bias: reduce over rows.
        Tensor gb = Tensor::zeros(b.shape);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) gb.values[j] += g.at(i, j);
        accumulate(n.in0, g);
        accumulate(n.in1, gb);
      }
      break;
    }
    case Op::kMul: {
      const Tensor& b = nodes_[n.in1].value;
      if (a.same_shape(b)) {
        Tensor ga = g, gb = g;
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ga.values[i] *= b.values[i];
          gb.values[i] *= a.values[i];
        }
        accumulate(n.in0, ga);
        accumulate(n.in1, gb);
      } else if (b.is_scalar()) {
        Tensor ga = g;
        double gs = 0.0;
        for (std::size_t i = 0; i < g.numel(); ++i) {
          gs += g.values[i] * a.values[i];
          ga.values[i] *= b.values[0];
        }
        accumulate(n.in0, ga);
        accumulate(n.in1, Tensor::scalar(gs));
      } else {
        Tensor gb = g;
        double gs = 0.0;
        for (std::size_t i = 0; i < g.numel(); ++i) {
          gs += g.values[i] * b.values[i];
          gb.values[i] *= a.values[0];
        }
        accumulate(n.in0, Tensor::scalar(gs));
        accumulate(n.in1, gb);
      }
      break;
    }
    case Op::kDiv:
    case Op::kDivGuard: {
      const Tensor& b = nodes_[n.in1].value;
      const bool guarded = n.op == Op::kDivGuard;
      const bool bscalar = b.is_scalar();
      Tensor ga = g;
      Tensor gb = Tensor::zeros(b.shape);
      if (!a.is_scalar() || n.op == Op::kDivGuard) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
          double den = bscalar ? b.values[0] : b.values[i];
          bool clamped = false;
          if (guarded && den < n.c0) {
            den = n.c0;
            clamped = true;
          }
          ga.values[i] = g.values[i] / den;
          const double db = clamped ? 0.0 : -g.values[i] * a.values[i] / (den * den);
          gb.values[bscalar ? 0 : i] += db;
        }
        accumulate(n.in0, ga);
        accumulate(n.in1, gb);
      } else {
        // Scalar numerator broadcast over the denominator tensor.
        double gs = 0.0;
        for (std::size_t i = 0; i < g.numel(); ++i) {
          const double den = b.values[i];
          gs += g.values[i] / den;
          gb.values[i] = -g.values[i] * a.values[0] / (den * den);
        }
        accumulate(n.in0, Tensor::scalar(gs));
        accumulate(n.in1, gb);
      }
      break;
    }
    case Op::kScale: {
      Tensor ga = g;
      for (double& v : ga.values) v *= n.c0;
      accumulate(n.in0, ga);
      break;
    }
    case Op::kAddConst:
      accumulate(n.in0, g);
      break;
    case Op::kRelu: {
      Tensor ga = g;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        if (a.values[i] <= 0.0) ga.values[i] = 0.0;
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kDropoutMask: {
      Tensor ga = g;
      for (std::size_t i = 0; i < g.numel(); ++i) ga.values[i] *= n.aux.values[i];
      accumulate(n.in0, ga);
      break;
    }
    case Op::kSoftmaxRows: {
      const Tensor& y = n.value;
      Tensor ga = g;
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t i = 0; i < rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
          dot += g.values[i * cols + j] * y.values[i * cols + j];
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t k = i * cols + j;
          ga.values[k] = y.values[k] * (g.values[k] - dot);
        }
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kSum: {
      accumulate(n.in0, Tensor::full(a.shape, g.values[0]));
      break;
    }
    case Op::kMean: {
      accumulate(n.in0, Tensor::full(a.shape, g.values[0] / static_cast<double>(a.numel())));
      break;
    }
    case Op::kPow: {
      Tensor ga = g;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] *= n.c0 * std::pow(a.values[i], n.c0 - 1.0);
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kSqrt: {
      Tensor ga = g;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] *= 0.5 / std::sqrt(std::max(a.values[i], kLogFloor));
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kLog: {
      Tensor ga = g;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.values[i] /= std::max(a.values[i], kLogFloor);
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kHeavisidePl: {
      const std::size_t rows = a.rows(), cols = a.cols();
      Tensor ga = Tensor::zeros(a.shape);
      for (std::size_t i = 0; i < rows; ++i) {
        const double* dp = n.aux.values.data() + i * 2 * cols;
        const double* dtau = dp + cols;
        const double* grow = g.values.data() + i * cols;
        double* garow = ga.values.data() + i * cols;
        double tau_flow = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          garow[j] += grow[j] * dp[j];
          tau_flow += grow[j] * dtau[j];
        }
        if (!n.flag) {
          // tau_avg is the mean of the top-2 coordinates.
          garow[n.aux_idx[2 * i]] += 0.5 * tau_flow;
          garow[n.aux_idx[2 * i + 1]] += 0.5 * tau_flow;
        }
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kL1NormalizeRows: {
      const Tensor& y = n.value;
      const std::size_t rows = y.rows(), cols = y.cols();
      Tensor ga = g;
      for (std::size_t i = 0; i < rows; ++i) {
        const double s = n.aux.values[i];
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
          dot += g.values[i * cols + j] * y.values[i * cols + j];
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t k = i * cols + j;
          ga.values[k] = (g.values[k] - dot) / s;
        }
      }
      accumulate(n.in0, ga);
      break;
    }
    case Op::kSegment: {
      Tensor ga = Tensor::zeros(a.shape);
      const std::size_t offset = n.aux_idx[0];
      for (std::size_t i = 0; i < g.numel(); ++i) ga.values[offset + i] += g.values[i];
      accumulate(n.in0, ga);
      break;
    }
    case Op::kLeaf:
      break;
  }
}

const Tensor& Graph::grad(Value v) const {
  const Node& n = node(v);
  if (n.adjoint.numel() == 0) {
    throw std::runtime_error("grad: node unreachable from the last backward root");
  }
  return n.adjoint;
}

GradCheckReport grad_check(const GraphBuilder& fn, const Tensor& x, double eps, double rel_tol,
                           const MarginFn& margin) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  GradCheckReport report;
  if (margin) {
    const double m = margin(x);
    if (m < 2.0 * eps) {
      report.skipped_near_breakpoint = true;
      report.note = "near-breakpoint, skipped";
      return report;
    }
  }

  Graph g;
  Value vx = g.leaf(x, true);
  Value root = fn(g, vx);
  if (!g.value(root).is_scalar()) {
    throw std::invalid_argument("grad_check: builder must produce a scalar root");
  }
  g.backward(root);
  const Tensor analytic = g.grad(vx);

  auto eval_at = [&fn](const Tensor& pt) {
    Graph h;
    Value v = h.leaf(pt, false);
    return h.value(fn(h, v)).values[0];
  };

  report.components.reserve(x.numel());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    Tensor xp = x, xm = x;
    xp.values[i] += eps;
    xm.values[i] -= eps;
    const double numeric = (eval_at(xp) - eval_at(xm)) / (2.0 * eps);
    GradCheckComponent c;
    c.index = i;
    c.analytic = analytic.values[i];
    c.numeric = numeric;
    const double denom = std::max({std::abs(c.analytic), std::abs(numeric), 1e-6});
    c.rel_error = std::abs(c.analytic - numeric) / denom;
    c.flagged = c.rel_error > rel_tol;
    report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
    if (c.flagged) ++report.flagged_count;
    report.components.push_back(c);
  }
  return report;
}

}  // namespace east::diff
