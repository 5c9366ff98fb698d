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

#include <vector>

#include "platekit/alphabet.hpp"
#include "platekit/nn.hpp"

namespace platekit {

struct VmConfig {
  int input_h = 32, input_w = 96;
  int in_channels = 3;
  std::vector<int> widths{32, 64, 128};   // per-stage channel widths
  std::vector<int> strides{2, 2, 1};      // per-stage downsampling
  int dim = 128;                          // feature dim d (= widths.back())
  int tf_layers = 2;
  int tf_heads = 4;
  int ffn_mult = 2;
  int max_len = 12;  // T, padded output slots
  Alphabet alphabet;

  int stride_product() const;
  int feat_h() const { return input_h / stride_product(); }
  int feat_w() const { return input_w / stride_product(); }
  int tokens() const { return feat_h() * feat_w(); }
  void validate() const;
};

/// Everything the vision model emits for one image. char_probs rows and
/// attention rows are probability distributions.
struct VisionOutput {
  Tensor<float> features;        // F_v [T,d]
  Tensor<float> char_probs;      // [T,A]
  Tensor<float> attention_maps;  // [T, feat_h*feat_w]
};

/// Tape handles for training-time composition.
struct VisionVars {
  Var<float> f_b;         // [h',w',d]
  Var<float> f_m;         // [h',w',d]
  Var<float> keys;        // [S,d]
  Var<float> attention;   // [T,S]
  Var<float> f_v;         // [T,d]
  Var<float> char_logits; // [T,A]
  Var<float> char_probs;  // [T,A]
};

/// Residual convolutional backbone: stem conv, then one strided stage per
/// width (downsample conv + residual block + channel layernorm).
class Backbone {
 public:
  Backbone() = default;
  Backbone(const VmConfig& cfg, Rng& rng);

  Var<float> operator()(Graph<float>& g, Var<float> image) const;
  void params(const std::string& prefix, ParamList<float>& out);
  int64_t param_count() const;
  int64_t flops(const VmConfig& cfg) const;

 private:
  struct Stage {
    Conv2dLayer<float> down;
    Conv2dLayer<float> conv1;
    Conv2dLayer<float> conv2;
    LayerNorm<float> norm;
  };
  Conv2dLayer<float> stem_;
  std::vector<Stage> stages_;
};

/// Transformer over the flattened h'*w' token sequence with fixed 2-D
/// sinusoidal positional encodings. Zero layers is the identity.
class SequenceModel {
 public:
  SequenceModel() = default;
  SequenceModel(const VmConfig& cfg, Rng& rng);

  Var<float> operator()(Graph<float>& g, Var<float> f_b) const;
  void params(const std::string& prefix, ParamList<float>& out);
  int64_t param_count() const;

  /// Positional table [S,d]; exposed so tests can permute tokens and
  /// encodings together.
  Tensor<float>& positional() { return pos_; }

 private:
  int feat_h_ = 0, feat_w_ = 0, dim_ = 0;
  Tensor<float> pos_;
  std::vector<TransformerBlock<float>> layers_;
};

/// Small encoder-decoder (2 down / 2 up, additive skips) producing one key
/// vector per spatial location.
class KeyNetwork {
 public:
  KeyNetwork() = default;
  KeyNetwork(const VmConfig& cfg, Rng& rng);

  Var<float> operator()(Graph<float>& g, Var<float> f_m) const;  // -> [S,d]
  void params(const std::string& prefix, ParamList<float>& out);
  int64_t param_count() const;

 private:
  Conv2dLayer<float> down1_, down2_, mid_, up1_, up2_, out_;
  Tensor<float> pe_;  // additive spatial encoding on the key map
};

/// Position attention: learned per-slot query bank against the key map, values
/// are the identity mapping of F_m.
class PositionAttention {
 public:
  PositionAttention() = default;
  PositionAttention(const VmConfig& cfg, Rng& rng);

  /// f_m [h',w',d], keys [S,d] -> attention [T,S], f_v [T,d], logits/probs.
  void operator()(Graph<float>& g, Var<float> f_m, Var<float> keys, VisionVars& vars) const;
  void params(const std::string& prefix, ParamList<float>& out);
  int64_t param_count() const;

 private:
  Tensor<float> queries_;  // [T,d], sinusoid-initialized, learned
  Linear<float> classifier_;
  float scale_ = 1.f;
};

class VisionModel {
 public:
  VisionModel() = default;
  VisionModel(const VmConfig& cfg, Rng& rng);

  VisionVars forward(Graph<float>& g, Var<float> image) const;

  /// Pure inference on one image tensor [H,W,C].
  VisionOutput predict(const Tensor<float>& image) const;

  void params(ParamList<float>& out);  // registered under "vm/"
  int64_t param_count() const;
  int64_t flops_per_image() const;
  const VmConfig& config() const { return cfg_; }
  SequenceModel& sequence_model() { return seq_; }

 private:
  VmConfig cfg_;
  Backbone backbone_;
  SequenceModel seq_;
  KeyNetwork keys_;
  PositionAttention attn_;
};

}  // namespace platekit
