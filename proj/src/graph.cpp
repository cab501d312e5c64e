// Copyright 2026 The a2w Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "a2w/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "a2w/errors.hpp"

namespace a2w {

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Shape& a,
                                 const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_string(a) + " and " + shape_string(b));
}

Graph& graph_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph != &g) throw ContractError("operands belong to different graphs");
  return g;
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Unary elementwise op with backward expressed through (x, y, dy).
template <typename Fwd, typename Bwd>
Var unary(Var a, Fwd fwd, Bwd bwd) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return g.emit(std::move(out), g.requires_grad(a),
                [a, bwd](Graph& g, std::uint32_t self) {
                  const Tensor& x = g.value(a);
                  const Tensor& y = g.value(self);
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < dx.size(); ++i) {
                    dx[i] += bwd(x[i], y[i]) * dy[i];
                  }
                });
}

}  // namespace

const Tensor& Var::value() const {
  if (!graph) throw ContractError("value() of an unbound Var");
  return graph->value(id);
}

// --- Graph ----------------------------------------------------------------

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::parameter(const Tensor& tensor) {
  if (auto it = bound_.find(&tensor); it != bound_.end()) {
    return Var{this, it->second};
  }
  Node node;
  // Recording graphs own the gradient slot of bound tensors; see header.
  node.external = const_cast<Tensor*>(&tensor);
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  bound_.emplace(&tensor, id);
  return Var{this, id};
}

const Tensor& Graph::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

bool Graph::requires_grad(std::initializer_list<Var> vars) const {
  return std::any_of(vars.begin(), vars.end(),
                     [this](Var v) { return nodes_[v.id].requires_grad; });
}

std::span<double> Graph::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.external) {
    n.external->enable_grad();
    return n.external->grad();
  }
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Var Graph::emit(Tensor value, bool needs_grad, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = record_ && needs_grad;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw ContractError("loss belongs to another graph");
  if (value(loss).size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(value(loss).shape()));
  }
  for (Node& n : nodes_) {
    if (!n.external) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  }
  grad(loss)[0] += 1.0;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
}

// --- Linear algebra -------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (B.rank() != 2 || A.rank() < 1 || A.rank() > 2 || A.cols() != B.rows()) {
    shape_mismatch("matmul", A.shape(), B.shape());
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out(A.rank() == 1 ? Shape{n} : Shape{m, n});
  const double* pa = A.data().data();
  const double* pb = B.data().data();
  double* pc = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return g.emit(std::move(out), g.requires_grad({a, b}),
                [a, b, m, k, n](Graph& g, std::uint32_t self) {
                  const double* dc = g.grad(self).data();
                  const double* pa = g.value(a).data().data();
                  const double* pb = g.value(b).data().data();
                  if (g.requires_grad(a)) {
                    double* da = g.grad(a).data();
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t p = 0; p < k; ++p) {
                        const double* brow = pb + p * n;
                        const double* dcrow = dc + i * n;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j) {
                          acc += dcrow[j] * brow[j];
                        }
                        da[i * k + p] += acc;
                      }
                    }
                  }
                  if (g.requires_grad(b)) {
                    double* db = g.grad(b).data();
                    for (std::size_t i = 0; i < m; ++i) {
                      const double* dcrow = dc + i * n;
                      for (std::size_t p = 0; p < k; ++p) {
                        const double av = pa[i * k + p];
                        if (av == 0.0) continue;
                        double* dbrow = db + p * n;
                        for (std::size_t j = 0; j < n; ++j) {
                          dbrow[j] += av * dcrow[j];
                        }
                      }
                    }
                  }
                });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionError("transpose needs a matrix");
  const std::size_t r = A.rows(), c = A.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = A[i * c + j];
  }
  return g.emit(std::move(out), g.requires_grad(a),
                [a, r, c](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      dx[i * c + j] += dy[j * r + i];
                    }
                  }
                });
}

// --- Elementwise ----------------------------------------------------------

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() == B.shape()) {
    Tensor out = A;
    out.drop_grad();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
    return g.emit(std::move(out), g.requires_grad({a, b}),
                  [a, b](Graph& g, std::uint32_t self) {
                    auto dy = g.grad(self);
                    for (Var v : {a, b}) {
                      if (!g.requires_grad(v)) continue;
                      auto dx = g.grad(v);
                      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
                    }
                  });
  }
  if (A.rank() == 2 && B.rank() == 1 && B.size() == A.cols()) {
    const std::size_t r = A.rows(), c = A.cols();
    Tensor out = A;
    out.drop_grad();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[i * c + j] += B[j];
    }
    return g.emit(std::move(out), g.requires_grad({a, b}),
                  [a, b, r, c](Graph& g, std::uint32_t self) {
                    auto dy = g.grad(self);
                    if (g.requires_grad(a)) {
                      auto da = g.grad(a);
                      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i];
                    }
                    if (g.requires_grad(b)) {
                      auto db = g.grad(b);
                      for (std::size_t i = 0; i < r; ++i) {
                        for (std::size_t j = 0; j < c; ++j) {
                          db[j] += dy[i * c + j];
                        }
                      }
                    }
                  });
  }
  shape_mismatch("add", A.shape(), B.shape());
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) shape_mismatch("mul", A.shape(), B.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return g.emit(std::move(out), g.requires_grad({a, b}),
                [a, b](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  const Tensor& A = g.value(a);
                  const Tensor& B = g.value(b);
                  if (g.requires_grad(a)) {
                    auto da = g.grad(a);
                    for (std::size_t i = 0; i < da.size(); ++i) {
                      da[i] += dy[i] * B[i];
                    }
                  }
                  if (g.requires_grad(b)) {
                    auto db = g.grad(b);
                    for (std::size_t i = 0; i < db.size(); ++i) {
                      db[i] += dy[i] * A[i];
                    }
                  }
                });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(a, sigmoid_scalar,
               [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) {
      throw DomainError("log of non-positive value " + std::to_string(v));
    }
  }
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var elementwise(Elementwise kind, Var a, Var b) {
  switch (kind) {
    case Elementwise::kTanh:
      return tanh(a);
    case Elementwise::kSigmoid:
      return sigmoid(a);
    case Elementwise::kLog:
      return log(a);
    case Elementwise::kAdd:
      return add(a, b);
    case Elementwise::kMul:
      return mul(a, b);
  }
  throw ConfigError("unknown elementwise kind");
}

// --- Reductions -----------------------------------------------------------

Var sum(Var a) {
  Graph& g = graph_of(a);
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return g.emit(Tensor::scalar(total), g.requires_grad(a),
                [a](Graph& g, std::uint32_t self) {
                  const double dy = g.grad(self)[0];
                  for (double& d : g.grad(a)) d += dy;
                });
}

Var softmax(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  if (x.size() == 0) throw DimensionError("softmax of an empty tensor");
  const double mx = *std::max_element(x.data().begin(), x.data().end());
  Tensor out(x.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    z += out[i];
  }
  for (double& v : out.data()) v /= z;
  return g.emit(std::move(out), g.requires_grad(a),
                [a](Graph& g, std::uint32_t self) {
                  const Tensor& y = g.value(self);
                  auto dy = g.grad(self);
                  double dot = 0.0;
                  for (std::size_t i = 0; i < y.size(); ++i) dot += dy[i] * y[i];
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < y.size(); ++i) {
                    dx[i] += y[i] * (dy[i] - dot);
                  }
                });
}

Var log_softmax(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  if (x.size() == 0 || x.rank() > 2) {
    throw DimensionError("log_softmax of " + shape_string(x.shape()));
  }
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data().data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(xr[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = xr[j] - lse;
  }
  return g.emit(std::move(out), g.requires_grad(a),
                [a, rows, cols](Graph& g, std::uint32_t self) {
                  const Tensor& y = g.value(self);
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t r = 0; r < rows; ++r) {
                    double total = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) {
                      total += dy[r * cols + j];
                    }
                    if (total == 0.0) {
                      for (std::size_t j = 0; j < cols; ++j) {
                        dx[r * cols + j] += dy[r * cols + j];
                      }
                      continue;
                    }
                    for (std::size_t j = 0; j < cols; ++j) {
                      const std::size_t i = r * cols + j;
                      dx[i] += dy[i] - std::exp(y[i]) * total;
                    }
                  }
                });
}

Var gather(Var a, std::span<const std::size_t> flat_indices) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  Tensor out({flat_indices.size()});
  for (std::size_t i = 0; i < flat_indices.size(); ++i) {
    if (flat_indices[i] >= x.size()) {
      throw DimensionError("gather index out of range");
    }
    out[i] = x[flat_indices[i]];
  }
  std::vector<std::size_t> idx(flat_indices.begin(), flat_indices.end());
  return g.emit(std::move(out), g.requires_grad(a),
                [a, idx](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    dx[idx[i]] += dy[i];
                  }
                });
}

Var pick(Var a, std::size_t index) {
  Graph& g = graph_of(a);
  if (index >= a.size()) {
    throw DimensionError("pick index " + std::to_string(index) +
                         " out of range for " + shape_string(a.shape()));
  }
  return g.emit(Tensor::scalar(a.value()[index]), g.requires_grad(a),
                [a, index](Graph& g, std::uint32_t self) {
                  g.grad(a)[index] += g.grad(self)[0];
                });
}

Var smoothed_cross_entropy(Var logits, std::size_t gold, double smoothing) {
  Graph& g = graph_of(logits);
  const Tensor& x = logits.value();
  const std::size_t v = x.size();
  if (gold >= v) throw DimensionError("gold label out of range");
  if (smoothing < 0.0 || smoothing > 1.0) {
    throw ConfigError("label smoothing must lie in [0, 1]");
  }
  const double off = v > 1 ? smoothing / static_cast<double>(v - 1) : 0.0;
  const double on = v > 1 ? 1.0 - smoothing : 1.0;
  const double mx = *std::max_element(x.data().begin(), x.data().end());
  double z = 0.0;
  for (double e : x.data()) z += std::exp(e - mx);
  const double lse = mx + std::log(z);
  double loss = 0.0;
  for (std::size_t k = 0; k < v; ++k) {
    const double q = k == gold ? on : off;
    if (q != 0.0) loss -= q * (x[k] - lse);
  }
  return g.emit(Tensor::scalar(loss), g.requires_grad(logits),
                [logits, gold, on, off, lse](Graph& g, std::uint32_t self) {
                  const double dy = g.grad(self)[0];
                  const Tensor& x = g.value(logits);
                  auto dx = g.grad(logits);
                  for (std::size_t k = 0; k < x.size(); ++k) {
                    const double q = k == gold ? on : off;
                    dx[k] += dy * (std::exp(x[k] - lse) - q);
                  }
                });
}

// --- Structure ------------------------------------------------------------

Var conv1d(Var signal, Var kernels) {
  Graph& g = graph_of(signal, kernels);
  const Tensor& s = signal.value();
  const Tensor& k = kernels.value();
  if (k.rank() != 2) throw DimensionError("conv1d kernels must be C x w");
  const std::size_t t_len = s.size(), channels = k.rows(), width = k.cols();
  if (width % 2 == 0) {
    throw ConfigError("conv1d kernel width must be odd, got " +
                      std::to_string(width));
  }
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  const auto T = static_cast<std::ptrdiff_t>(t_len);
  Tensor out({channels, t_len});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::ptrdiff_t t = 0; t < T; ++t) {
      double acc = 0.0;
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(width); ++j) {
        const std::ptrdiff_t src = t + j - half;
        if (src < 0 || src >= T) continue;
        acc += k[c * width + j] * s[src];
      }
      out[c * t_len + t] = acc;
    }
  }
  return g.emit(std::move(out), g.requires_grad({signal, kernels}),
                [signal, kernels, channels, width, half, T](Graph& g,
                                                           std::uint32_t self) {
                  auto dy = g.grad(self);
                  const Tensor& s = g.value(signal);
                  const Tensor& k = g.value(kernels);
                  const bool need_s = g.requires_grad(signal);
                  const bool need_k = g.requires_grad(kernels);
                  std::span<double> ds, dk;
                  if (need_s) ds = g.grad(signal);
                  if (need_k) dk = g.grad(kernels);
                  for (std::size_t c = 0; c < channels; ++c) {
                    for (std::ptrdiff_t t = 0; t < T; ++t) {
                      const double d = dy[c * T + t];
                      if (d == 0.0) continue;
                      for (std::ptrdiff_t j = 0;
                           j < static_cast<std::ptrdiff_t>(width); ++j) {
                        const std::ptrdiff_t src = t + j - half;
                        if (src < 0 || src >= T) continue;
                        if (need_s) ds[src] += d * k[c * width + j];
                        if (need_k) dk[c * width + j] += d * s[src];
                      }
                    }
                  }
                });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Graph& g = graph_of(parts[0]);
  std::size_t total = 0;
  bool needs = false;
  for (Var p : parts) {
    graph_of(parts[0], p);
    if (p.value().rank() != 1) throw DimensionError("concat needs vectors");
    total += p.size();
    needs = needs || g.requires_grad(p);
  }
  Tensor out({total});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + off);
    off += v.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return g.emit(std::move(out), needs,
                [inputs](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  std::size_t off = 0;
                  for (Var p : inputs) {
                    const std::size_t n = g.value(p).size();
                    if (g.requires_grad(p)) {
                      auto dx = g.grad(p);
                      for (std::size_t i = 0; i < n; ++i) dx[i] += dy[off + i];
                    }
                    off += n;
                  }
                });
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(std::span<const Var>(parts));
}

Var concat_cols(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.rows() != B.rows()) {
    shape_mismatch("concat_cols", A.shape(), B.shape());
  }
  const std::size_t r = A.rows(), ca = A.cols(), cb = B.cols();
  Tensor out({r, ca + cb});
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(A.data().begin() + i * ca, ca,
                out.data().begin() + i * (ca + cb));
    std::copy_n(B.data().begin() + i * cb, cb,
                out.data().begin() + i * (ca + cb) + ca);
  }
  return g.emit(std::move(out), g.requires_grad({a, b}),
                [a, b, r, ca, cb](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  if (g.requires_grad(a)) {
                    auto da = g.grad(a);
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < ca; ++j) {
                        da[i * ca + j] += dy[i * (ca + cb) + j];
                      }
                    }
                  }
                  if (g.requires_grad(b)) {
                    auto db = g.grad(b);
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < cb; ++j) {
                        db[i * cb + j] += dy[i * (ca + cb) + ca + j];
                      }
                    }
                  }
                });
}

Var row(Var a, std::size_t r) {
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionError("row() needs a matrix");
  if (r >= A.rows()) {
    throw DimensionError("row index " + std::to_string(r) +
                         " out of range for " + shape_string(A.shape()));
  }
  const std::size_t c = A.cols();
  Tensor out({c});
  std::copy_n(A.data().begin() + r * c, c, out.data().begin());
  return g.emit(std::move(out), g.requires_grad(a),
                [a, r, c](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t j = 0; j < c; ++j) dx[r * c + j] += dy[j];
                });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows of nothing");
  Graph& g = graph_of(rows[0]);
  const std::size_t c = rows[0].size();
  bool needs = false;
  for (Var v : rows) {
    graph_of(rows[0], v);
    if (v.value().rank() != 1 || v.size() != c) {
      shape_mismatch("stack_rows", rows[0].shape(), v.shape());
    }
    needs = needs || g.requires_grad(v);
  }
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& v = rows[i].value();
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + i * c);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return g.emit(std::move(out), needs,
                [inputs, c](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  for (std::size_t i = 0; i < inputs.size(); ++i) {
                    if (!g.requires_grad(inputs[i])) continue;
                    auto dx = g.grad(inputs[i]);
                    for (std::size_t j = 0; j < c; ++j) dx[j] += dy[i * c + j];
                  }
                });
}

Var take_rows(Var a, std::span<const std::size_t> indices) {
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionError("take_rows needs a matrix");
  const std::size_t c = A.cols();
  for (std::size_t r : indices) {
    if (r >= A.rows()) throw DimensionError("take_rows index out of range");
  }
  Tensor out({indices.size(), c});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(A.data().begin() + indices[i] * c, c,
                out.data().begin() + i * c);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return g.emit(std::move(out), g.requires_grad(a),
                [a, idx, c](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      dx[idx[i] * c + j] += dy[i * c + j];
                    }
                  }
                });
}

Var slice(Var a, std::size_t begin, std::size_t length) {
  Graph& g = graph_of(a);
  const Tensor& A = a.value();
  if (A.rank() != 1 || begin + length > A.size()) {
    throw DimensionError("slice [" + std::to_string(begin) + ", +" +
                         std::to_string(length) + ") of " +
                         shape_string(A.shape()));
  }
  Tensor out({length});
  std::copy_n(A.data().begin() + begin, length, out.data().begin());
  return g.emit(std::move(out), g.requires_grad(a),
                [a, begin, length](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < length; ++i) {
                    dx[begin + i] += dy[i];
                  }
                });
}

Var reshape(Var a, Shape shape) {
  Graph& g = graph_of(a);
  if (shape_size(shape) != a.size()) {
    shape_mismatch("reshape", a.shape(), shape);
  }
  Tensor out = a.value().reshaped(std::move(shape));
  return g.emit(std::move(out), g.requires_grad(a),
                [a](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
                });
}

// --- Fused ----------------------------------------------------------------

Var lstm_pointwise(Var pre, Var c_prev) {
  Graph& g = graph_of(pre, c_prev);
  const Tensor& z = pre.value();
  const Tensor& cp = c_prev.value();
  const std::size_t h = cp.size();
  if (z.rank() != 1 || cp.rank() != 1 || z.size() != 4 * h) {
    shape_mismatch("lstm_pointwise", z.shape(), cp.shape());
  }
  // Cache gate activations for the backward pass: [i f g o tanh(c)].
  std::vector<double> cache(5 * h);
  Tensor out({2 * h});
  for (std::size_t j = 0; j < h; ++j) {
    const double ig = sigmoid_scalar(z[j]);
    const double fg = sigmoid_scalar(z[h + j]);
    const double gg = std::tanh(z[2 * h + j]);
    const double og = sigmoid_scalar(z[3 * h + j]);
    const double c = fg * cp[j] + ig * gg;
    const double tc = std::tanh(c);
    cache[j] = ig;
    cache[h + j] = fg;
    cache[2 * h + j] = gg;
    cache[3 * h + j] = og;
    cache[4 * h + j] = tc;
    out[j] = og * tc;
    out[h + j] = c;
  }
  return g.emit(
      std::move(out), g.requires_grad({pre, c_prev}),
      [pre, c_prev, h, cache = std::move(cache)](Graph& g, std::uint32_t self) {
        auto dy = g.grad(self);
        const Tensor& cp = g.value(c_prev);
        const bool need_z = g.requires_grad(pre);
        const bool need_c = g.requires_grad(c_prev);
        std::span<double> dz, dcp;
        if (need_z) dz = g.grad(pre);
        if (need_c) dcp = g.grad(c_prev);
        for (std::size_t j = 0; j < h; ++j) {
          const double ig = cache[j], fg = cache[h + j], gg = cache[2 * h + j];
          const double og = cache[3 * h + j], tc = cache[4 * h + j];
          const double dh = dy[j];
          const double dc = dy[h + j] + dh * og * (1.0 - tc * tc);
          if (need_z) {
            dz[j] += dc * gg * ig * (1.0 - ig);
            dz[h + j] += dc * cp[j] * fg * (1.0 - fg);
            dz[2 * h + j] += dc * ig * (1.0 - gg * gg);
            dz[3 * h + j] += dh * tc * og * (1.0 - og);
          }
          if (need_c) dcp[j] += dc * fg;
        }
      });
}

Var dropout(Var a, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (rate == 0.0) return a;
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = keep(rng) ? inv : 0.0;
    out[i] = x[i] * mask[i];
  }
  return g.emit(std::move(out), g.requires_grad(a),
                [a, mask = std::move(mask)](Graph& g, std::uint32_t self) {
                  auto dy = g.grad(self);
                  auto dx = g.grad(a);
                  for (std::size_t i = 0; i < dx.size(); ++i) {
                    dx[i] += dy[i] * mask[i];
                  }
                });
}

}  // namespace a2w
