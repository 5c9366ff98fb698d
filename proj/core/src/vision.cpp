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

#include "platekit/vision.hpp"

#include <cmath>

namespace platekit {

int VmConfig::stride_product() const {
  int p = 1;
  for (int s : strides) p *= s;
  return p;
}

void VmConfig::validate() const {
  if (widths.empty() || widths.size() != strides.size())
    throw ConfigError("vm: widths and strides must be nonempty and equal length");
  if (dim != widths.back())
    throw ConfigError("vm: dim (" + std::to_string(dim) + ") must equal the last stage width (" +
                      std::to_string(widths.back()) + ")");
  if (dim % 2 != 0) throw ConfigError("vm: dim must be even for 2-D positional encodings");
  if (tf_heads < 1 || dim % tf_heads != 0)
    throw ConfigError("vm: dim must be divisible by tf_heads");
  for (int s : strides)
    if (s < 1) throw ConfigError("vm: strides must be >= 1");
  const int p = stride_product();
  if (input_h % p != 0 || input_w % p != 0)
    throw ConfigError("vm: input " + std::to_string(input_h) + "x" + std::to_string(input_w) +
                      " not divisible by stride product " + std::to_string(p));
  if (feat_h() % 4 != 0 || feat_w() % 4 != 0)
    throw ConfigError("vm: feature map " + std::to_string(feat_h()) + "x" +
                      std::to_string(feat_w()) + " must be divisible by 4 for the key network");
  if (max_len < 2) throw ConfigError("vm: max_len must be >= 2");
  if (alphabet.size() < 4) throw ConfigError("vm: alphabet too small");
  if (ffn_mult < 1) throw ConfigError("vm: ffn_mult must be >= 1");
}

// ---------------------------------------------------------------------------
// Backbone
// ---------------------------------------------------------------------------

Backbone::Backbone(const VmConfig& cfg, Rng& rng) {
  stem_ = Conv2dLayer<float>(3, 3, cfg.in_channels, cfg.widths[0], 1, 1, rng);
  int prev = cfg.widths[0];
  for (size_t i = 0; i < cfg.widths.size(); ++i) {
    const int width = cfg.widths[i];
    Stage st;
    st.down = Conv2dLayer<float>(3, 3, prev, width, cfg.strides[i], 1, rng);
    st.conv1 = Conv2dLayer<float>(3, 3, width, width, 1, 1, rng);
    st.conv2 = Conv2dLayer<float>(3, 3, width, width, 1, 1, rng);
    st.norm = LayerNorm<float>(width);
    stages_.push_back(std::move(st));
    prev = width;
  }
}

Var<float> Backbone::operator()(Graph<float>& g, Var<float> image) const {
  Var<float> x = gelu(stem_(g, image));
  for (const Stage& st : stages_) {
    x = gelu(st.down(g, x));
    Var<float> y = st.conv2(g, gelu(st.conv1(g, x)));
    x = st.norm(g, gelu(add(x, y)));
  }
  return x;
}

void Backbone::params(const std::string& prefix, ParamList<float>& out) {
  stem_.params(prefix + "/stem", out);
  for (size_t i = 0; i < stages_.size(); ++i) {
    const std::string sp = prefix + "/stage" + std::to_string(i);
    stages_[i].down.params(sp + "/down", out);
    stages_[i].conv1.params(sp + "/conv1", out);
    stages_[i].conv2.params(sp + "/conv2", out);
    stages_[i].norm.params(sp + "/norm", out);
  }
}

int64_t Backbone::param_count() const {
  int64_t n = stem_.param_count();
  for (const Stage& st : stages_)
    n += st.down.param_count() + st.conv1.param_count() + st.conv2.param_count() +
         st.norm.param_count();
  return n;
}

int64_t Backbone::flops(const VmConfig& cfg) const {
  // conv FLOPs = 2 * KH*KW*Ci*Co * OH*OW
  int64_t total = 2LL * 9 * cfg.in_channels * cfg.widths[0] * cfg.input_h * cfg.input_w;
  int h = cfg.input_h, w = cfg.input_w;
  int prev = cfg.widths[0];
  for (size_t i = 0; i < cfg.widths.size(); ++i) {
    const int width = cfg.widths[i];
    h /= cfg.strides[i];
    w /= cfg.strides[i];
    total += 2LL * 9 * prev * width * h * w;       // down
    total += 2LL * 9 * width * width * h * w * 2;  // residual pair
    prev = width;
  }
  return total;
}

// ---------------------------------------------------------------------------
// SequenceModel
// ---------------------------------------------------------------------------

SequenceModel::SequenceModel(const VmConfig& cfg, Rng& rng)
    : feat_h_(cfg.feat_h()), feat_w_(cfg.feat_w()), dim_(cfg.dim) {
  pos_ = sinusoid_table_2d<float>(feat_h_, feat_w_, dim_);
  for (int l = 0; l < cfg.tf_layers; ++l)
    layers_.emplace_back(dim_, cfg.tf_heads, cfg.ffn_mult, rng);
}

Var<float> SequenceModel::operator()(Graph<float>& g, Var<float> f_b) const {
  if (layers_.empty()) return f_b;  // exact identity
  const auto& shape = f_b.shape();
  const int s = shape[0] * shape[1];
  Var<float> x = add(reshape(f_b, {s, dim_}), g.constant(pos_));
  for (const auto& layer : layers_) x = layer(g, x);
  return reshape(x, shape);
}

void SequenceModel::params(const std::string& prefix, ParamList<float>& out) {
  for (size_t i = 0; i < layers_.size(); ++i)
    layers_[i].params(prefix + "/layer" + std::to_string(i), out);
}

int64_t SequenceModel::param_count() const {
  int64_t n = 0;
  for (const auto& l : layers_) n += l.param_count();
  return n;
}

// ---------------------------------------------------------------------------
// KeyNetwork
// ---------------------------------------------------------------------------

KeyNetwork::KeyNetwork(const VmConfig& cfg, Rng& rng) {
  const int d = cfg.dim;
  down1_ = Conv2dLayer<float>(3, 3, d, d, 2, 1, rng);
  down2_ = Conv2dLayer<float>(3, 3, d, d, 2, 1, rng);
  mid_ = Conv2dLayer<float>(3, 3, d, d, 1, 1, rng);
  up1_ = Conv2dLayer<float>(3, 3, d, d, 1, 1, rng);
  up2_ = Conv2dLayer<float>(3, 3, d, d, 1, 1, rng);
  out_ = Conv2dLayer<float>(1, 1, d, d, 1, 0, rng);
  // the key map carries its location explicitly; without this the queries can
  // collapse onto a single informative column early in training
  pe_ = sinusoid_table_2d<float>(cfg.feat_h(), cfg.feat_w(), d);
}

Var<float> KeyNetwork::operator()(Graph<float>& g, Var<float> f_m) const {
  const Shape shape = f_m.shape();
  Var<float> x0 = f_m;
  Var<float> x1 = gelu(down1_(g, x0));
  Var<float> x2 = gelu(mid_(g, gelu(down2_(g, x1))));
  Var<float> u1 = gelu(add(up1_(g, upsample_nearest2x(x2)), x1));
  Var<float> u2 = gelu(add(up2_(g, upsample_nearest2x(u1)), x0));
  Var<float> k = reshape(out_(g, u2), {shape[0] * shape[1], shape[2]});
  return add(k, g.constant(pe_));
}

void KeyNetwork::params(const std::string& prefix, ParamList<float>& out) {
  down1_.params(prefix + "/down1", out);
  down2_.params(prefix + "/down2", out);
  mid_.params(prefix + "/mid", out);
  up1_.params(prefix + "/up1", out);
  up2_.params(prefix + "/up2", out);
  out_.params(prefix + "/out", out);
}

int64_t KeyNetwork::param_count() const {
  return down1_.param_count() + down2_.param_count() + mid_.param_count() + up1_.param_count() +
         up2_.param_count() + out_.param_count();
}

// ---------------------------------------------------------------------------
// PositionAttention
// ---------------------------------------------------------------------------

PositionAttention::PositionAttention(const VmConfig& cfg, Rng& rng) {
  // learned query bank, initialized from the spatial sinusoid tables as
  // evenly spaced left-to-right probes (center row, column p*w'/T); matches
  // the additive key encoding so the initial attention already reads in order
  const int half = cfg.dim / 2;
  const Tensor<float> rows = sinusoid_table<float>(cfg.feat_h(), half);
  const Tensor<float> cols = sinusoid_table<float>(cfg.feat_w(), cfg.dim - half);
  queries_ = Tensor<float>({cfg.max_len, cfg.dim});
  const int center = cfg.feat_h() / 2;
  for (int p = 0; p < cfg.max_len; ++p) {
    int col = static_cast<int>((p + 0.5) * cfg.feat_w() / cfg.max_len);
    col = std::min(col, cfg.feat_w() - 1);
    for (int i = 0; i < half; ++i) queries_.at(p, i) = rows.at(center, i);
    for (int i = 0; i < cfg.dim - half; ++i) queries_.at(p, half + i) = cols.at(col, i);
  }
  classifier_ = Linear<float>(cfg.dim, cfg.alphabet.size(), rng);
  scale_ = static_cast<float>(1.0 / std::sqrt(static_cast<double>(cfg.dim)));
}

void PositionAttention::operator()(Graph<float>& g, Var<float> f_m, Var<float> keys,
                                   VisionVars& vars) const {
  const auto& shape = f_m.shape();
  const int s = shape[0] * shape[1];
  Var<float> values = reshape(f_m, {s, shape[2]});  // identity mapping H
  Var<float> q = g.param(queries_);
  vars.attention = softmax(scale(matmul(q, transpose(keys)), scale_), -1);
  vars.f_v = matmul(vars.attention, values);
  vars.char_logits = classifier_(g, vars.f_v);
  vars.char_probs = softmax(vars.char_logits, -1);
}

void PositionAttention::params(const std::string& prefix, ParamList<float>& out) {
  out.push_back({prefix + "/queries", &queries_});
  classifier_.params(prefix + "/classifier", out);
}

int64_t PositionAttention::param_count() const {
  return queries_.numel() + classifier_.param_count();
}

// ---------------------------------------------------------------------------
// VisionModel
// ---------------------------------------------------------------------------

VisionModel::VisionModel(const VmConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  backbone_ = Backbone(cfg_, rng);
  seq_ = SequenceModel(cfg_, rng);
  keys_ = KeyNetwork(cfg_, rng);
  attn_ = PositionAttention(cfg_, rng);
}

VisionVars VisionModel::forward(Graph<float>& g, Var<float> image) const {
  const auto& shape = image.shape();
  if (shape.size() != 3 || shape[0] != cfg_.input_h || shape[1] != cfg_.input_w ||
      shape[2] != cfg_.in_channels)
    throw ShapeError("vm: image shape " + shape_str(shape) + " does not match configured " +
                     std::to_string(cfg_.input_h) + "x" + std::to_string(cfg_.input_w) + "x" +
                     std::to_string(cfg_.in_channels));
  VisionVars vars;
  vars.f_b = backbone_(g, image);
  vars.f_m = seq_(g, vars.f_b);
  vars.keys = keys_(g, vars.f_m);
  attn_(g, vars.f_m, vars.keys, vars);
  return vars;
}

VisionOutput VisionModel::predict(const Tensor<float>& image) const {
  Graph<float> g(/*grad=*/false);
  VisionVars vars = forward(g, g.input(image));
  VisionOutput out;
  out.features = vars.f_v.value();
  out.char_probs = vars.char_probs.value();
  out.attention_maps = vars.attention.value();
  return out;
}

void VisionModel::params(ParamList<float>& out) {
  backbone_.params("vm/backbone", out);
  seq_.params("vm/seq", out);
  keys_.params("vm/keys", out);
  attn_.params("vm/posattn", out);
}

int64_t VisionModel::param_count() const {
  return backbone_.param_count() + seq_.param_count() + keys_.param_count() + attn_.param_count();
}

int64_t VisionModel::flops_per_image() const {
  const int s = cfg_.tokens(), d = cfg_.dim, t = cfg_.max_len, a = cfg_.alphabet.size();
  int64_t total = backbone_.flops(cfg_);
  // transformer: qkv+o projections 4*2*S*d*d, attention 2*2*S*S*d, ffn 2*2*S*d*(d*mult)
  total += static_cast<int64_t>(cfg_.tf_layers) *
           (8LL * s * d * d + 4LL * s * s * d + 4LL * s * d * d * cfg_.ffn_mult);
  // key network: five 3x3 convs (full, /2, /4, /2, full) + 1x1 out
  const int64_t hw = static_cast<int64_t>(s);
  total += 2LL * 9 * d * d * (hw / 4 + hw / 16 + hw / 16 + hw / 4 + hw) + 2LL * d * d * hw;
  // position attention: QK^T, attn*V, classifier
  total += 2LL * t * s * d * 2 + 2LL * t * d * a;
  return total;
}

}  // namespace platekit
