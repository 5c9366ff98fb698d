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

#include "platekit/language.hpp"

#include <cmath>
#include <limits>

namespace platekit {

void LmConfig::validate() const {
  if (layers < 1) throw ConfigError("lm: layers must be >= 1");
  if (heads < 1 || dim % heads != 0) throw ConfigError("lm: dim must be divisible by heads");
  if (iterations < 0) throw ConfigError("lm: iterations must be >= 0");
  if (max_len < 2) throw ConfigError("lm: max_len must be >= 2");
  if (ffn_mult < 1) throw ConfigError("lm: ffn_mult must be >= 1");
  if (alphabet.size() < 4) throw ConfigError("lm: alphabet too small");
}

Tensor<float> build_cloze_mask(int t) {
  if (t < 2)
    throw ValueError("cloze mask needs T >= 2; a 1-slot mask would leave a row fully masked");
  Tensor<float> mask({t, t});
  const float neg_inf = -std::numeric_limits<float>::infinity();
  for (int i = 0; i < t; ++i) mask.at(i, i) = neg_inf;
  return mask;
}

// ---------------------------------------------------------------------------
// Bcn
// ---------------------------------------------------------------------------

Bcn::Bcn(const LmConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  wt_ = he_init<float>({cfg_.alphabet.size(), cfg_.dim}, cfg_.alphabet.size(), rng);
  q0_ = sinusoid_table<float>(cfg_.max_len, cfg_.dim);
  mask_ = build_cloze_mask(cfg_.max_len);
  for (int l = 0; l < cfg_.layers; ++l) {
    Layer layer;
    layer.ln1 = LayerNorm<float>(cfg_.dim);
    layer.ffn = FeedForward<float>(cfg_.dim, cfg_.dim * cfg_.ffn_mult, rng);
    layer.ln2 = LayerNorm<float>(cfg_.dim);
    layers_.push_back(std::move(layer));
  }
  classifier_ = Linear<float>(cfg_.dim, cfg_.alphabet.size(), rng);
}

Bcn::Forward Bcn::operator()(Graph<float>& g, Var<float> probs) const {
  const Tensor<float>& pv = probs.value();
  if (pv.ndim() != 2 || pv.dim(0) != cfg_.max_len || pv.dim(1) != cfg_.alphabet.size())
    throw ShapeError("bcn: input must be [" + std::to_string(cfg_.max_len) + "," +
                     std::to_string(cfg_.alphabet.size()) + "], got " + shape_str(pv.shape()));
  for (int i = 0; i < pv.dim(0); ++i) {
    double sum = 0;
    for (int j = 0; j < pv.dim(1); ++j) {
      const float v = pv.at(i, j);
      if (v < -1e-6f) throw ValueError("bcn: input row " + std::to_string(i) + " has negative mass");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4)
      throw ValueError("bcn: input row " + std::to_string(i) + " is not normalized (sum " +
                       std::to_string(sum) + ")");
  }

  const int heads = cfg_.heads;
  const int hd = cfg_.dim / heads;
  const float scl = static_cast<float>(1.0 / std::sqrt(static_cast<double>(cfg_.dim)));

  // K_i = V_i = P(y_i) W_t, computed once and fed to every layer
  Var<float> kv = matmul(probs, g.param(wt_));
  Var<float> mask = g.constant(mask_);
  Var<float> x = g.param(q0_);

  for (const Layer& layer : layers_) {
    std::vector<Var<float>> head_outs;
    head_outs.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      Var<float> qh = slice_cols(x, h * hd, (h + 1) * hd);
      Var<float> kvh = slice_cols(kv, h * hd, (h + 1) * hd);
      Var<float> scores = add(scale(matmul(qh, transpose(kvh)), scl), mask);
      head_outs.push_back(matmul(softmax(scores, -1), kvh));
    }
    Var<float> mha = heads == 1 ? head_outs[0] : concat_cols(head_outs);
    x = layer.ln1(g, add(x, mha));
    x = layer.ln2(g, add(x, layer.ffn(g, x)));
  }

  Forward out;
  out.features = x;
  out.logits = classifier_(g, x);
  out.probs = softmax(out.logits, -1);
  return out;
}

void Bcn::params(const std::string& prefix, ParamList<float>& out) {
  out.push_back({prefix + "/wt", &wt_});
  out.push_back({prefix + "/queries", &q0_});
  for (size_t i = 0; i < layers_.size(); ++i) {
    const std::string lp = prefix + "/layer" + std::to_string(i);
    layers_[i].ln1.params(lp + "/ln1", out);
    layers_[i].ffn.params(lp + "/ffn", out);
    layers_[i].ln2.params(lp + "/ln2", out);
  }
  classifier_.params(prefix + "/classifier", out);
}

int64_t Bcn::param_count() const {
  int64_t n = wt_.numel() + q0_.numel() + classifier_.param_count();
  for (const Layer& l : layers_)
    n += l.ln1.param_count() + l.ffn.param_count() + l.ln2.param_count();
  return n;
}

int64_t Bcn::flops() const {
  const int64_t t = cfg_.max_len, c = cfg_.dim, a = cfg_.alphabet.size();
  int64_t total = 2 * t * a * c;  // KV projection
  // per layer: scores + attnV (2 * T^2 * C each over all heads), FFN
  total += static_cast<int64_t>(cfg_.layers) * (4 * t * t * c + 4 * t * c * c * cfg_.ffn_mult);
  total += 2 * t * c * a;  // classifier
  return total;
}

// ---------------------------------------------------------------------------
// FusionGate
// ---------------------------------------------------------------------------

FusionGate::FusionGate(int dim, int alphabet_size, Rng& rng)
    : gate_v_(dim, dim, rng, /*bias=*/false),
      gate_l_(dim, dim, rng, /*bias=*/true),
      classifier_(dim, alphabet_size, rng) {}

FusionGate::Forward FusionGate::operator()(Graph<float>& g, Var<float> f_v, Var<float> f_l) const {
  const Tensor<float>& a = f_v.value();
  const Tensor<float>& b = f_l.value();
  if (!a.same_shape(b))
    throw ConfigError("fusion: branch shapes differ, " + shape_str(a.shape()) + " vs " +
                      shape_str(b.shape()) + " (vision dim must equal language dim)");
  Forward out;
  out.gate = sigmoid(add(gate_v_(g, f_v), gate_l_(g, f_l)));
  Var<float> ones = g.constant(Tensor<float>::ones(a.shape()));
  out.features = add(mul(out.gate, f_v), mul(sub(ones, out.gate), f_l));
  out.logits = classifier_(g, out.features);
  out.probs = softmax(out.logits, -1);
  return out;
}

void FusionGate::params(const std::string& prefix, ParamList<float>& out) {
  gate_v_.params(prefix + "/gate_v", out);
  gate_l_.params(prefix + "/gate_l", out);
  classifier_.params(prefix + "/classifier", out);
}

int64_t FusionGate::param_count() const {
  return gate_v_.param_count() + gate_l_.param_count() + classifier_.param_count();
}

int64_t FusionGate::flops(int t) const {
  const int64_t d = gate_v_.in_dim();
  const int64_t a = classifier_.out_dim();
  return 4 * t * d * d + 2 * t * d * a;
}

// ---------------------------------------------------------------------------
// Refiner
// ---------------------------------------------------------------------------

Refiner::Refiner(const LmConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  bcn_ = Bcn(cfg_, rng);
  fusion_ = FusionGate(cfg_.dim, cfg_.alphabet.size(), rng);
}

std::vector<RefineStep> Refiner::refine_on_graph(
    Graph<float>& g, const Tensor<float>& vision_probs, Var<float> f_v, int iterations,
    const std::function<Tensor<float>(const Tensor<float>&, int)>& input_filter) const {
  std::vector<RefineStep> steps;
  Tensor<float> current = vision_probs;
  for (int it = 0; it < iterations; ++it) {
    Tensor<float> fed = input_filter ? input_filter(current, it) : current;
    RefineStep step;
    step.lm = bcn_(g, g.constant(std::move(fed)));
    step.fused = fusion_(g, f_v, step.lm.features);
    current = step.fused.probs.value();  // detached before the next iteration
    steps.push_back(std::move(step));
  }
  return steps;
}

Refiner::Result Refiner::refine(const VisionOutput& vision, int iterations) const {
  Result result;
  if (iterations == 0) {
    result.final_probs = vision.char_probs;
    return result;
  }
  Graph<float> g(/*grad=*/false);
  Var<float> f_v = g.input(vision.features);
  std::vector<RefineStep> steps = refine_on_graph(g, vision.char_probs, f_v, iterations);
  for (const RefineStep& step : steps) {
    result.lm_trace.push_back(step.lm.probs.value());
    result.fused_trace.push_back(step.fused.probs.value());
  }
  result.final_probs = result.fused_trace.back();
  return result;
}

void Refiner::params(ParamList<float>& out) {
  bcn_.params("lm", out);
  fusion_.params("fusion", out);
}

int64_t Refiner::param_count() const { return bcn_.param_count() + fusion_.param_count(); }

int64_t Refiner::flops_per_iteration() const {
  return bcn_.flops() + fusion_.flops(cfg_.max_len);
}

// ---------------------------------------------------------------------------

std::string decode_string(const Tensor<float>& dist, const Alphabet& alphabet) {
  if (dist.ndim() != 2 || dist.dim(1) != alphabet.size())
    throw ShapeError("decode_string: want [T," + std::to_string(alphabet.size()) + "], got " +
                     shape_str(dist.shape()));
  std::string out;
  for (int i = 0; i < dist.dim(0); ++i) {
    int best = 0;
    float best_p = dist.at(i, 0);
    for (int j = 1; j < dist.dim(1); ++j) {
      if (dist.at(i, j) > best_p) {  // strict: ties keep the lower index
        best_p = dist.at(i, j);
        best = j;
      }
    }
    if (best == Alphabet::kEos) break;
    if (best == Alphabet::kPad) continue;
    out.push_back(alphabet.char_at(best));
  }
  return out;
}

}  // namespace platekit
