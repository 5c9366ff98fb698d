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

#include <string>
#include <unordered_map>
#include <vector>

#include "platekit/autodiff.hpp"
#include "platekit/rng.hpp"
#include "platekit/tensor.hpp"

namespace platekit {

using Scalar = float;  // training dtype; f64 instantiations exist for gradient checks

/// Named view of a module parameter, gathered in deterministic registration
/// order for the optimizer and the checkpoint writer.
template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T>* tensor;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

/// One model evaluation: owns the tape and memoizes parameter bindings so a
/// parameter appears as a single leaf no matter how many layers touch it.
template <typename T>
class Graph {
 public:
  explicit Graph(bool grad = true) { tape_.set_grad_enabled(grad); }

  Tape<T>& tape() { return tape_; }

  Var<T> param(const Tensor<T>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    Var<T> v = tape_.leaf(p, /*requires_grad=*/tape_.grad_enabled());
    bound_.emplace(&p, v);
    return v;
  }

  Var<T> input(Tensor<T> x, bool requires_grad = false) {
    return tape_.leaf(std::move(x), requires_grad);
  }
  Var<T> constant(Tensor<T> x) { return tape_.constant(std::move(x)); }

  void backward(Var<T> loss) { tape_.backward(loss); }

  /// Gradient for a bound parameter after backward; nullptr when this
  /// evaluation never touched the parameter or no gradient reached it.
  const Tensor<T>* grad_for(const Tensor<T>& p) const {
    auto it = bound_.find(&p);
    if (it == bound_.end()) return nullptr;
    if (!tape_.has_grad(it->second)) return nullptr;
    return &tape_.grad(it->second);
  }

 private:
  Tape<T> tape_;
  std::unordered_map<const Tensor<T>*, Var<T>> bound_;
};

// ---------------------------------------------------------------------------
// Initializers
// ---------------------------------------------------------------------------

/// He-style fan-in scaled normal init.
template <typename T>
Tensor<T> he_init(Shape shape, int fan_in, Rng& rng);

/// Classic sinusoidal position table [len, dim].
template <typename T>
Tensor<T> sinusoid_table(int len, int dim);

/// 2-D table [h*w, dim]: the first half of the channels encode the row, the
/// second half the column.
template <typename T>
Tensor<T> sinusoid_table_2d(int h, int w, int dim);

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(int in, int out, Rng& rng, bool bias = true);

  Var<T> operator()(Graph<T>& g, Var<T> x) const;  // x [N,in] -> [N,out]
  void params(const std::string& prefix, ParamList<T>& out);
  int in_dim() const { return w_.empty() ? 0 : w_.dim(0); }
  int out_dim() const { return w_.empty() ? 0 : w_.dim(1); }
  int64_t param_count() const { return w_.numel() + b_.numel(); }

 private:
  Tensor<T> w_;  // [in,out]
  Tensor<T> b_;  // [out] (absent when bias=false)
};

template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(int kh, int kw, int ci, int co, int stride, int pad, Rng& rng);

  Var<T> operator()(Graph<T>& g, Var<T> x) const;  // [H,W,Ci] -> [OH,OW,Co]
  void params(const std::string& prefix, ParamList<T>& out);
  int64_t param_count() const { return w_.numel() + b_.numel(); }
  int stride() const { return stride_; }
  const Tensor<T>& weight() const { return w_; }

 private:
  Tensor<T> w_;  // [KH,KW,Ci,Co]
  Tensor<T> b_;  // [Co]
  int stride_ = 1;
  int pad_ = 0;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(int dim);

  Var<T> operator()(Graph<T>& g, Var<T> x) const;
  void params(const std::string& prefix, ParamList<T>& out);
  int64_t param_count() const { return gain_.numel() + bias_.numel(); }

 private:
  Tensor<T> gain_;
  Tensor<T> bias_;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(int dim, int hidden, Rng& rng);

  Var<T> operator()(Graph<T>& g, Var<T> x) const;
  void params(const std::string& prefix, ParamList<T>& out);
  int64_t param_count() const { return lin1_.param_count() + lin2_.param_count(); }

 private:
  Linear<T> lin1_;
  Linear<T> lin2_;
};

/// Standard multi-head attention with per-head q/k/v/o projections, scaled by
/// 1/sqrt(head_dim). An optional additive mask [Tq,Tk] is applied to every
/// head's logits before the softmax.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(int dim, int heads, Rng& rng);

  Var<T> operator()(Graph<T>& g, Var<T> q, Var<T> kv, const Tensor<T>* mask = nullptr) const;
  void params(const std::string& prefix, ParamList<T>& out);
  int64_t param_count() const;
  int heads() const { return static_cast<int>(wq_.size()); }

 private:
  std::vector<Linear<T>> wq_, wk_, wv_, wo_;
  T scale_ = T(1);
};

/// Post-LN transformer encoder block: x = LN(x + MHA(x,x)); x = LN(x + FFN(x)).
template <typename T>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(int dim, int heads, int ffn_mult, Rng& rng);

  Var<T> operator()(Graph<T>& g, Var<T> x, const Tensor<T>* mask = nullptr) const;
  void params(const std::string& prefix, ParamList<T>& out);
  int64_t param_count() const;

 private:
  MultiHeadAttention<T> attn_;
  LayerNorm<T> ln1_;
  FeedForward<T> ffn_;
  LayerNorm<T> ln2_;
};

}  // namespace platekit
