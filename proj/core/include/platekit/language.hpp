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

#include <functional>
#include <vector>

#include "platekit/alphabet.hpp"
#include "platekit/nn.hpp"
#include "platekit/vision.hpp"

namespace platekit {

struct LmConfig {
  int layers = 2;
  int heads = 4;
  int dim = 128;  // C; must equal the vision dim for fusion
  int ffn_mult = 2;
  int iterations = 3;  // M
  int max_len = 12;    // T, shared with the vision model
  Alphabet alphabet;

  void validate() const;
};

/// [T,T] additive attention mask: 0 off-diagonal, -inf on the diagonal, so a
/// position can never attend to its own timestep. T < 2 would leave a softmax
/// row fully masked and is rejected.
Tensor<float> build_cloze_mask(int t);

/// Bidirectional cloze network. Keys and values are the projected input
/// distributions (K_i = V_i = P(y_i) W_t), fed unchanged to every layer's
/// cross-attention; the query stream starts from a learned positional bank
/// and is the previous layer's output afterwards. Attention has no q/output
/// projections (heads are column slices) and is scaled by 1/sqrt(C); there is
/// no self-attention anywhere, so output row i cannot depend on input row i.
class Bcn {
 public:
  Bcn() = default;
  Bcn(const LmConfig& cfg, Rng& rng);

  struct Forward {
    Var<float> features;  // F_l [T,C]
    Var<float> logits;    // [T,A]
    Var<float> probs;     // refined distributions [T,A]
  };

  /// probs rows must lie on the simplex (within 1e-4) or ValueError is thrown.
  Forward operator()(Graph<float>& g, Var<float> probs) const;

  void params(const std::string& prefix, ParamList<float>& out);  // "lm/..."
  int64_t param_count() const;
  int64_t flops() const;

 private:
  struct Layer {
    LayerNorm<float> ln1;
    FeedForward<float> ffn;
    LayerNorm<float> ln2;
  };
  LmConfig cfg_;
  Tensor<float> wt_;  // [A,C]
  Tensor<float> q0_;  // [T,C] positional bank
  Tensor<float> mask_;
  std::vector<Layer> layers_;
  Linear<float> classifier_;
};

/// Learned elementwise gate over the two feature branches:
/// G = logistic(W [F_v || F_l]); F_f = G*F_v + (1-G)*F_l.
class FusionGate {
 public:
  FusionGate() = default;
  FusionGate(int dim, int alphabet_size, Rng& rng);

  struct Forward {
    Var<float> gate;      // [T,d], entries in (0,1)
    Var<float> features;  // F_f [T,d]
    Var<float> logits;    // [T,A]
    Var<float> probs;     // [T,A]
  };

  Forward operator()(Graph<float>& g, Var<float> f_v, Var<float> f_l) const;

  void params(const std::string& prefix, ParamList<float>& out);  // "fusion/..."
  int64_t param_count() const;
  int64_t flops(int t) const;

 private:
  Linear<float> gate_v_;  // no bias; the concat-projection's left half
  Linear<float> gate_l_;  // carries the shared bias
  Linear<float> classifier_;
};

/// One refinement iteration's tape handles (training composition).
struct RefineStep {
  Bcn::Forward lm;
  FusionGate::Forward fused;
};

/// BCN + fusion + the iteration loop.
class Refiner {
 public:
  Refiner() = default;
  Refiner(const LmConfig& cfg, Rng& rng);

  /// Training-time composition. The distribution entering each iteration is
  /// detached (a constant leaf): iteration 1 consumes `vision_probs`, later
  /// iterations the previous fused output. `input_filter` may perturb each
  /// iteration's input (teacher noise); identity when null.
  std::vector<RefineStep> refine_on_graph(
      Graph<float>& g, const Tensor<float>& vision_probs, Var<float> f_v, int iterations,
      const std::function<Tensor<float>(const Tensor<float>&, int)>& input_filter = nullptr) const;

  struct Result {
    Tensor<float> final_probs;              // [T,A]
    std::vector<Tensor<float>> lm_trace;    // per-iteration LM outputs
    std::vector<Tensor<float>> fused_trace; // per-iteration fused outputs
  };

  /// Inference: M = 0 returns the vision distributions untouched.
  Result refine(const VisionOutput& vision, int iterations) const;

  const Bcn& bcn() const { return bcn_; }
  const FusionGate& fusion() const { return fusion_; }
  const LmConfig& config() const { return cfg_; }

  void params(ParamList<float>& out);  // lm/ and fusion/ prefixes
  int64_t param_count() const;
  int64_t flops_per_iteration() const;

 private:
  LmConfig cfg_;
  Bcn bcn_;
  FusionGate fusion_;
};

/// Greedy decode: per-row argmax (ties -> lowest index), truncate at the
/// first EOS, never emit PAD.
std::string decode_string(const Tensor<float>& dist, const Alphabet& alphabet);

}  // namespace platekit
