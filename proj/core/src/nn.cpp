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

#include "platekit/nn.hpp"

#include <cmath>

namespace platekit {

template <typename T>
Tensor<T> he_init(Shape shape, int fan_in, Rng& rng) {
  Tensor<T> t(std::move(shape));
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (T& v : t.data()) v = static_cast<T>(rng.normal(0.0, sd));
  return t;
}

template <typename T>
Tensor<T> sinusoid_table(int len, int dim) {
  Tensor<T> t({len, dim});
  for (int p = 0; p < len; ++p) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -2.0 * (i / 2) / static_cast<double>(dim));
      const double angle = p * freq;
      t.at(p, i) = static_cast<T>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
    }
  }
  return t;
}

template <typename T>
Tensor<T> sinusoid_table_2d(int h, int w, int dim) {
  const int half = dim / 2;
  const Tensor<T> rows = sinusoid_table<T>(h, half);
  const Tensor<T> cols = sinusoid_table<T>(w, dim - half);
  Tensor<T> t({h * w, dim});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      T* dst = t.ptr() + (static_cast<int64_t>(y) * w + x) * dim;
      for (int i = 0; i < half; ++i) dst[i] = rows.at(y, i);
      for (int i = 0; i < dim - half; ++i) dst[half + i] = cols.at(x, i);
    }
  return t;
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

template <typename T>
Linear<T>::Linear(int in, int out, Rng& rng, bool bias) {
  w_ = he_init<T>({in, out}, in, rng);
  if (bias) b_ = Tensor<T>({out});
}

template <typename T>
Var<T> Linear<T>::operator()(Graph<T>& g, Var<T> x) const {
  Var<T> y = matmul(x, g.param(w_));
  if (!b_.empty()) y = add_lastdim(y, g.param(b_));
  return y;
}

template <typename T>
void Linear<T>::params(const std::string& prefix, ParamList<T>& out) {
  out.push_back({prefix + "/w", &w_});
  if (!b_.empty()) out.push_back({prefix + "/b", &b_});
}

// ---------------------------------------------------------------------------
// Conv2dLayer
// ---------------------------------------------------------------------------

template <typename T>
Conv2dLayer<T>::Conv2dLayer(int kh, int kw, int ci, int co, int stride, int pad, Rng& rng)
    : stride_(stride), pad_(pad) {
  w_ = he_init<T>({kh, kw, ci, co}, kh * kw * ci, rng);
  b_ = Tensor<T>({co});
}

template <typename T>
Var<T> Conv2dLayer<T>::operator()(Graph<T>& g, Var<T> x) const {
  return add_lastdim(conv2d(x, g.param(w_), stride_, pad_), g.param(b_));
}

template <typename T>
void Conv2dLayer<T>::params(const std::string& prefix, ParamList<T>& out) {
  out.push_back({prefix + "/w", &w_});
  out.push_back({prefix + "/b", &b_});
}

// ---------------------------------------------------------------------------
// LayerNorm
// ---------------------------------------------------------------------------

template <typename T>
LayerNorm<T>::LayerNorm(int dim) {
  gain_ = Tensor<T>::ones({dim});
  bias_ = Tensor<T>({dim});
}

template <typename T>
Var<T> LayerNorm<T>::operator()(Graph<T>& g, Var<T> x) const {
  return layer_norm(x, g.param(gain_), g.param(bias_));
}

template <typename T>
void LayerNorm<T>::params(const std::string& prefix, ParamList<T>& out) {
  out.push_back({prefix + "/gain", &gain_});
  out.push_back({prefix + "/bias", &bias_});
}

// ---------------------------------------------------------------------------
// FeedForward
// ---------------------------------------------------------------------------

template <typename T>
FeedForward<T>::FeedForward(int dim, int hidden, Rng& rng)
    : lin1_(dim, hidden, rng), lin2_(hidden, dim, rng) {}

template <typename T>
Var<T> FeedForward<T>::operator()(Graph<T>& g, Var<T> x) const {
  return lin2_(g, gelu(lin1_(g, x)));
}

template <typename T>
void FeedForward<T>::params(const std::string& prefix, ParamList<T>& out) {
  lin1_.params(prefix + "/lin1", out);
  lin2_.params(prefix + "/lin2", out);
}

// ---------------------------------------------------------------------------
// MultiHeadAttention
// ---------------------------------------------------------------------------

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(int dim, int heads, Rng& rng) {
  if (heads < 1 || dim % heads != 0)
    throw ConfigError("attention dim " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  const int hd = dim / heads;
  scale_ = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  for (int h = 0; h < heads; ++h) {
    wq_.emplace_back(dim, hd, rng);
    wk_.emplace_back(dim, hd, rng);
    wv_.emplace_back(dim, hd, rng);
    wo_.emplace_back(hd, dim, rng, /*bias=*/h == 0);  // one shared output bias
  }
}

template <typename T>
Var<T> MultiHeadAttention<T>::operator()(Graph<T>& g, Var<T> q, Var<T> kv,
                                         const Tensor<T>* mask) const {
  Var<T> out;
  for (size_t h = 0; h < wq_.size(); ++h) {
    Var<T> qh = wq_[h](g, q);
    Var<T> kh = wk_[h](g, kv);
    Var<T> vh = wv_[h](g, kv);
    Var<T> logits = scale(matmul(qh, transpose(kh)), scale_);
    if (mask != nullptr) logits = add(logits, g.constant(*mask));
    Var<T> attn = softmax(logits, -1);
    Var<T> mixed = wo_[h](g, matmul(attn, vh));
    out = (h == 0) ? mixed : add(out, mixed);
  }
  return out;
}

template <typename T>
void MultiHeadAttention<T>::params(const std::string& prefix, ParamList<T>& out) {
  for (size_t h = 0; h < wq_.size(); ++h) {
    const std::string hp = prefix + "/h" + std::to_string(h);
    wq_[h].params(hp + "/q", out);
    wk_[h].params(hp + "/k", out);
    wv_[h].params(hp + "/v", out);
    wo_[h].params(hp + "/o", out);
  }
}

template <typename T>
int64_t MultiHeadAttention<T>::param_count() const {
  int64_t n = 0;
  for (size_t h = 0; h < wq_.size(); ++h)
    n += wq_[h].param_count() + wk_[h].param_count() + wv_[h].param_count() + wo_[h].param_count();
  return n;
}

// ---------------------------------------------------------------------------
// TransformerBlock
// ---------------------------------------------------------------------------

template <typename T>
TransformerBlock<T>::TransformerBlock(int dim, int heads, int ffn_mult, Rng& rng)
    : attn_(dim, heads, rng), ln1_(dim), ffn_(dim, dim * ffn_mult, rng), ln2_(dim) {}

template <typename T>
Var<T> TransformerBlock<T>::operator()(Graph<T>& g, Var<T> x, const Tensor<T>* mask) const {
  x = ln1_(g, add(x, attn_(g, x, x, mask)));
  x = ln2_(g, add(x, ffn_(g, x)));
  return x;
}

template <typename T>
void TransformerBlock<T>::params(const std::string& prefix, ParamList<T>& out) {
  attn_.params(prefix + "/attn", out);
  ln1_.params(prefix + "/ln1", out);
  ffn_.params(prefix + "/ffn", out);
  ln2_.params(prefix + "/ln2", out);
}

template <typename T>
int64_t TransformerBlock<T>::param_count() const {
  return attn_.param_count() + ln1_.param_count() + ffn_.param_count() + ln2_.param_count();
}

// ---------------------------------------------------------------------------

#define PLATEKIT_NN_INSTANTIATE(T)                      \
  template Tensor<T> he_init<T>(Shape, int, Rng&);      \
  template Tensor<T> sinusoid_table<T>(int, int);       \
  template Tensor<T> sinusoid_table_2d<T>(int, int, int); \
  template class Linear<T>;                             \
  template class Conv2dLayer<T>;                        \
  template class LayerNorm<T>;                          \
  template class FeedForward<T>;                        \
  template class MultiHeadAttention<T>;                 \
  template class TransformerBlock<T>;

PLATEKIT_NN_INSTANTIATE(float)
PLATEKIT_NN_INSTANTIATE(double)

#undef PLATEKIT_NN_INSTANTIATE

}  // namespace platekit
