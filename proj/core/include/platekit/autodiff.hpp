/*
 * Copyright 2026 The platekit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "platekit/tensor.hpp"

namespace platekit {

template <typename T>
class Tape;

/// Handle to a tensor recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode tape. Operations append nodes in execution order; backward
/// replays the recorded closures once each, in reverse, so the node order is
/// already topological. A tape is single-writer; once backward has run it is
/// consumed and must be reset before recording again.
template <typename T>
class Tape {
 public:
  /// Backward rule. Receives the tape and the id of the node it belongs to;
  /// reads that node's grad and accumulates into the parents' grad buffers.
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad = false);
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  /// Records an op result. requires_grad is inherited from parents; the
  /// backward closure is dropped when grads are disabled or unneeded.
  Var<T> push(Tensor<T> value, std::initializer_list<Var<T>> parents, BackwardFn backward);
  Var<T> push(Tensor<T> value, const std::vector<Var<T>>& parents, BackwardFn backward);

  const Tensor<T>& value(Var<T> v) const { return node(v.id).value; }
  bool requires_grad(Var<T> v) const { return node(v.id).requires_grad; }

  /// Gradient of a node; throws if backward has not populated it.
  const Tensor<T>& grad(Var<T> v) const;
  bool has_grad(Var<T> v) const { return !node(v.id).grad.empty(); }

  // id-based accessors for backward rules
  const Tensor<T>& value_of(int id) const { return node(id).value; }
  const Tensor<T>& grad_of(int id) const;
  bool wants_grad(int id) const { return node(id).requires_grad; }

  /// Accumulation buffer for backward rules; allocates zeros on first use.
  Tensor<T>& grad_buffer(int id);

  /// Reverse sweep from a scalar loss. Populates grads of every reachable
  /// node with requires_grad, then marks the tape consumed.
  void backward(Var<T> loss);

  void reset();
  size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Node& node(int id) {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) throw Error("invalid tape handle");
    return nodes_[static_cast<size_t>(id)];
  }
  const Node& node(int id) const { return const_cast<Tape*>(this)->node(id); }

  // deque: node references (values, grads) stay valid as ops append
  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Operator set. All shapes are checked; failures throw ShapeError with the
// offending extents in the message.
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(Var<T> a, Var<T> b);  // same shape
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);  // elementwise
template <typename T>
Var<T> scale(Var<T> a, T s);
/// x[..., N] + v[N], v broadcast over leading axes (bias add).
template <typename T>
Var<T> add_lastdim(Var<T> x, Var<T> v);

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);  // [m,k] x [k,n] -> [m,n]
template <typename T>
Var<T> transpose(Var<T> a);  // 2-D
template <typename T>
Var<T> reshape(Var<T> a, Shape shape);
template <typename T>
Var<T> slice_cols(Var<T> a, int c0, int c1);  // [m,n] -> [m,c1-c0]
template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts);  // along last axis of 2-D

template <typename T>
Var<T> relu(Var<T> a);
template <typename T>
Var<T> gelu(Var<T> a);
template <typename T>
Var<T> sigmoid(Var<T> a);
template <typename T>
Var<T> exp_(Var<T> a);

/// Softmax along `axis`. Stabilized by max subtraction; -inf entries map to
/// exactly 0. A slice that is entirely -inf throws ValueError.
template <typename T>
Var<T> softmax(Var<T> a, int axis);

/// Normalization over the last axis with affine gain/bias (both sized to the
/// last extent).
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

/// x [H,W,Ci], w [KH,KW,Ci,Co] -> [OH,OW,Co] with
/// OH = (H + 2*pad - KH)/stride + 1. Accumulation order per output element is
/// (kh, kw, ci) ascending, which the naive-oracle tests rely on.
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, int stride, int pad);

/// Nearest-neighbor 2x upsampling of [H,W,C].
template <typename T>
Var<T> upsample_nearest2x(Var<T> x);

/// Row gather: weight [V,D], indices in [0,V) -> [N,D].
template <typename T>
Var<T> embedding(Var<T> weight, const std::vector<int>& indices);

template <typename T>
Var<T> sum_all(Var<T> a);  // -> [1]
template <typename T>
Var<T> mean_all(Var<T> a);  // -> [1]

/// Mean negative log-likelihood over rows whose target != ignore_index.
/// logits [N,A]; targets.size() == N. Throws ValueError when every row is
/// ignored.
template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets, int ignore_index);

// ---------------------------------------------------------------------------
// Raw kernels shared by forward/backward rules (and by benchmarks).
// ---------------------------------------------------------------------------
namespace kernels {

/// C[m,n] += A[m,k] * B[k,n]. i-k-j loop order: every C element accumulates
/// its k terms in ascending order (matches a naive dot product), while the
/// inner j loop vectorizes.
template <typename T>
void gemm_acc(const T* a, const T* b, T* c, int m, int k, int n);

template <typename T>
void transpose2d(const T* src, T* dst, int rows, int cols);

}  // namespace kernels

}  // namespace platekit
