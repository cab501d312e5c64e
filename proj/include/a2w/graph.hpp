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

// Reverse-mode automatic differentiation over dense double tensors.
//
// A Graph is a tape: every operation appends a node holding its output value
// and, when recording, a closure that pushes the node's gradient into its
// inputs. Nodes are only ever appended, so inputs always precede outputs and
// backward() simply walks the tape in reverse.
//
// Parameters enter the tape through Graph::parameter(), which binds the
// caller's tensor by address; gradients for such leaves accumulate directly
// into the tensor's grad buffer. A recording graph therefore needs exclusive
// access to the parameters it binds. Non-recording graphs never write to
// bound tensors and may share frozen parameters across threads.

#ifndef A2W_GRAPH_HPP_
#define A2W_GRAPH_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "a2w/tensor.hpp"

namespace a2w {

class Graph;

/// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return graph != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

class Graph {
 public:
  using Backward = std::function<void(Graph&, std::uint32_t self)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf bound to an external tensor. Binding the same tensor twice returns
  /// the same node.
  Var parameter(const Tensor& tensor);

  const Tensor& value(Var v) const { return value(v.id); }
  const Tensor& value(std::uint32_t id) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool requires_grad(std::initializer_list<Var> vars) const;

  /// Gradient slot of a node; allocated (zeroed) on first access.
  std::span<double> grad(Var v) { return grad(v.id); }
  std::span<double> grad(std::uint32_t id);

  /// Appends an operation result. `backward` is dropped when the graph is
  /// not recording or no input needs a gradient.
  Var emit(Tensor value, bool needs_grad, Backward backward);

  /// Seeds d(loss)/d(loss) = 1 and propagates in reverse tape order.
  /// Interior gradients are reset first; parameter gradients accumulate.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor* external = nullptr;
    std::vector<double> grad;
    Backward backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;  // deque: value() references survive growth
  std::unordered_map<const Tensor*, std::uint32_t> bound_;
  bool record_;
};

// --- Linear algebra -------------------------------------------------------

/// Matrix product. A rank-1 left operand is treated as a row vector and
/// yields a rank-1 result.
Var matmul(Var a, Var b);
Var transpose(Var a);

// --- Elementwise ----------------------------------------------------------

/// Sum of equal shapes, or matrix plus a row vector broadcast over rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var tanh(Var a);
Var sigmoid(Var a);
/// Natural log; throws DomainError on non-positive input.
Var log(Var a);

enum class Elementwise { kTanh, kSigmoid, kLog, kAdd, kMul };
/// Dispatches to the unary or binary kernels above; `b` is ignored for
/// unary kinds.
Var elementwise(Elementwise kind, Var a, Var b = {});

// --- Reductions and normalizers -------------------------------------------

Var sum(Var a);
Var softmax(Var a);
/// Log-softmax of a vector, or of each row of a matrix.
Var log_softmax(Var a);
/// Elements a[i] for the given flat (row-major) indices, as a vector.
Var gather(Var a, std::span<const std::size_t> flat_indices);
/// Scalar element a[index].
Var pick(Var a, std::size_t index);
/// Cross entropy of softmax(logits) against a target with 1 - smoothing on
/// `gold` and smoothing / (V - 1) on every other class.
Var smoothed_cross_entropy(Var logits, std::size_t gold, double smoothing);

// --- Structure ------------------------------------------------------------

/// Same-padded 1-D convolution of a length-T signal with C odd-width kernels
/// (C x w); output is C x T.
Var conv1d(Var signal, Var kernels);
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
/// Column-wise concatenation of two matrices with equal row counts.
Var concat_cols(Var a, Var b);
/// Row r of a matrix as a rank-1 tensor. Backward scatters into that row.
Var row(Var a, std::size_t r);
Var stack_rows(std::span<const Var> rows);
Var take_rows(Var a, std::span<const std::size_t> indices);
Var slice(Var a, std::size_t begin, std::size_t length);
Var reshape(Var a, Shape shape);

// --- Fused ----------------------------------------------------------------

/// LSTM gate nonlinearities. `pre` holds the 4H pre-activations ordered
/// input, forget, candidate, output. Returns [h; c] of length 2H.
Var lstm_pointwise(Var pre, Var c_prev);
/// Inverted dropout; identity when rate is zero.
Var dropout(Var a, double rate, std::mt19937_64& rng);

}  // namespace a2w

#endif  // A2W_GRAPH_HPP_
