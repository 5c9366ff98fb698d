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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>

#include "platekit/language.hpp"

using namespace platekit;

namespace {

LmConfig tiny_lm(int t, int layers = 1, int heads = 1, int dim = 8) {
  LmConfig cfg;
  cfg.layers = layers;
  cfg.heads = heads;
  cfg.dim = dim;
  cfg.ffn_mult = 2;
  cfg.iterations = 3;
  cfg.max_len = t;
  return cfg;
}

Tensor<float> random_distributions(int t, int a, Rng& rng) {
  Tensor<float> d({t, a});
  for (int i = 0; i < t; ++i) {
    double sum = 0;
    for (int j = 0; j < a; ++j) {
      const double v = rng.uniform(0.01, 1.0);
      d.at(i, j) = static_cast<float>(v);
      sum += v;
    }
    for (int j = 0; j < a; ++j) d.at(i, j) = static_cast<float>(d.at(i, j) / sum);
  }
  return d;
}

std::map<std::string, const Tensor<float>*> named(Bcn& bcn) {
  ParamList<float> params;
  bcn.params("lm", params);
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& p : params) by_name[p.name] = p.tensor;
  return by_name;
}

}  // namespace

TEST_CASE("cloze mask pattern") {
  const float ninf = -std::numeric_limits<float>::infinity();

  // T=3: 0 off-diagonal, -inf diagonal
  const Tensor<float> m3 = build_cloze_mask(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j)
        CHECK(m3.at(i, j) == ninf);
      else
        CHECK(m3.at(i, j) == 0.f);
    }

  // pattern holds for every T in [2, 64]
  for (int t = 2; t <= 64; ++t) {
    const Tensor<float> m = build_cloze_mask(t);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        CHECK((i == j ? m.at(i, j) == ninf : m.at(i, j) == 0.f));
  }

  CHECK_THROWS_AS(build_cloze_mask(1), ValueError);
  CHECK_THROWS_AS(build_cloze_mask(0), ValueError);

  // post-softmax weight at (i,i) is exactly zero
  Tape<float> tape;
  Rng rng(3);
  Tensor<float> scores({3, 3});
  for (auto& v : scores.data()) v = static_cast<float>(rng.uniform(-1, 1));
  auto attn = softmax(add(tape.constant(scores), tape.constant(build_cloze_mask(3))), -1);
  for (int i = 0; i < 3; ++i) CHECK(attn.value().at(i, i) == 0.f);

  // T=2: each position attends only to the other with weight 1
  Tensor<float> s2({2, 2});
  for (auto& v : s2.data()) v = static_cast<float>(rng.uniform(-2, 2));
  auto a2 = softmax(add(tape.constant(s2), tape.constant(build_cloze_mask(2))), -1);
  CHECK(a2.value().at(0, 1) == 1.f);
  CHECK(a2.value().at(1, 0) == 1.f);
}

TEST_CASE("cloze independence: bit-identical rows and exactly-zero gradient blocks") {
  Rng rng(7);
  for (int draw = 0; draw < 30; ++draw) {
    const int t = static_cast<int>(rng.uniform_int(2, 12));
    const int heads = rng.chance(0.5) ? 1 : 2;
    const int layers = static_cast<int>(rng.uniform_int(1, 2));
    LmConfig cfg = tiny_lm(t, layers, heads, 8);
    Rng wrng(rng.next());
    Bcn bcn(cfg, wrng);

    const int a = cfg.alphabet.size();
    Tensor<float> input = random_distributions(t, a, rng);
    const int row = static_cast<int>(rng.uniform_int(0, t - 1));

    Graph<float> g1(false);
    const Tensor<float> out1 = g1.tape().value(bcn(g1, g1.input(input)).probs);

    // replace row `row` with a different distribution
    Tensor<float> mutated = input;
    Rng mrng(rng.next());
    const Tensor<float> other = random_distributions(1, a, mrng);
    for (int j = 0; j < a; ++j) mutated.at(row, j) = other.at(0, j);

    Graph<float> g2(false);
    const Tensor<float> out2 = g2.tape().value(bcn(g2, g2.input(mutated)).probs);

    // output row `row` is bit-identical; no tolerance
    for (int j = 0; j < a; ++j) CHECK(out1.at(row, j) == out2.at(row, j));

    // autodiff: d(output row)/d(input row) is exactly zero
    Graph<float> g3;
    auto probs_var = g3.input(input, /*requires_grad=*/true);
    auto fwd = bcn(g3, probs_var);
    Tensor<float> select({t, a});
    for (int j = 0; j < a; ++j) select.at(row, j) = 1.f;
    g3.backward(sum_all(mul(fwd.probs, g3.constant(select))));
    const Tensor<float>& grad = g3.tape().grad(probs_var);
    for (int j = 0; j < a; ++j) CHECK(grad.at(row, j) == 0.f);
  }
}

TEST_CASE("bcn matches the explicit-loop oracle (T=3, L=1, one head)") {
  LmConfig cfg = tiny_lm(3, 1, 1, 8);
  Rng rng(11);
  Bcn bcn(cfg, rng);
  const auto w = named(bcn);
  const int t = 3, c = 8, a = cfg.alphabet.size();
  const double eps = 1e-5;  // layer_norm default

  Rng drng(13);
  const Tensor<float> input = random_distributions(t, a, drng);

  // ---- oracle: Eq. 7 with explicit double loops ----
  auto mat = [&](const char* name) { return w.at(name); };
  std::vector<std::vector<double>> kv(t, std::vector<double>(c, 0.0));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j)
      for (int s = 0; s < a; ++s)
        kv[i][j] += static_cast<double>(input.at(i, s)) * mat("lm/wt")->at(s, j);

  std::vector<std::vector<double>> x(t, std::vector<double>(c));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j) x[i][j] = mat("lm/queries")->at(i, j);

  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  std::vector<std::vector<double>> mha(t, std::vector<double>(c, 0.0));
  for (int i = 0; i < t; ++i) {
    std::vector<double> logits(t);
    double mx = -1e300;
    for (int j = 0; j < t; ++j) {
      if (j == i) {
        logits[j] = -std::numeric_limits<double>::infinity();  // cloze mask
        continue;
      }
      double dot = 0;
      for (int k = 0; k < c; ++k) dot += x[i][k] * kv[j][k];
      logits[j] = dot * scale;
      mx = std::max(mx, logits[j]);
    }
    double denom = 0;
    std::vector<double> attn(t, 0.0);
    for (int j = 0; j < t; ++j) {
      if (j == i) continue;
      attn[j] = std::exp(logits[j] - mx);
      denom += attn[j];
    }
    for (int j = 0; j < t; ++j) {
      if (j == i) continue;
      attn[j] /= denom;
      for (int k = 0; k < c; ++k) mha[i][k] += attn[j] * kv[j][k];
    }
  }

  auto layer_norm_row = [&](std::vector<double>& row, const Tensor<float>* gain,
                            const Tensor<float>* bias) {
    double mean = 0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    double var = 0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(row.size());
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (size_t k = 0; k < row.size(); ++k)
      row[k] = (row[k] - mean) * rstd * (*gain)[static_cast<int64_t>(k)] +
               (*bias)[static_cast<int64_t>(k)];
  };
  auto gelu_exact = [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); };

  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < c; ++k) x[i][k] += mha[i][k];
    layer_norm_row(x[i], mat("lm/layer0/ln1/gain"), mat("lm/layer0/ln1/bias"));

    // feed-forward: gelu(x W1 + b1) W2 + b2
    const Tensor<float>* w1 = mat("lm/layer0/ffn/lin1/w");
    const Tensor<float>* b1 = mat("lm/layer0/ffn/lin1/b");
    const Tensor<float>* w2 = mat("lm/layer0/ffn/lin2/w");
    const Tensor<float>* b2 = mat("lm/layer0/ffn/lin2/b");
    const int h = w1->dim(1);
    std::vector<double> hidden(static_cast<size_t>(h), 0.0);
    for (int k = 0; k < h; ++k) {
      double acc = (*b1)[k];
      for (int m = 0; m < c; ++m) acc += x[i][static_cast<size_t>(m)] * w1->at(m, k);
      hidden[static_cast<size_t>(k)] = gelu_exact(acc);
    }
    std::vector<double> ff(static_cast<size_t>(c), 0.0);
    for (int k = 0; k < c; ++k) {
      double acc = (*b2)[k];
      for (int m = 0; m < h; ++m) acc += hidden[static_cast<size_t>(m)] * w2->at(m, k);
      ff[static_cast<size_t>(k)] = acc;
    }
    for (int k = 0; k < c; ++k) x[i][static_cast<size_t>(k)] += ff[static_cast<size_t>(k)];
    layer_norm_row(x[i], mat("lm/layer0/ln2/gain"), mat("lm/layer0/ln2/bias"));
  }

  // classifier + softmax
  const Tensor<float>* wc = mat("lm/classifier/w");
  const Tensor<float>* bc = mat("lm/classifier/b");
  std::vector<std::vector<double>> expect(t, std::vector<double>(a, 0.0));
  for (int i = 0; i < t; ++i) {
    std::vector<double> logits(static_cast<size_t>(a), 0.0);
    double mx = -1e300;
    for (int s = 0; s < a; ++s) {
      double acc = (*bc)[s];
      for (int k = 0; k < c; ++k) acc += x[i][static_cast<size_t>(k)] * wc->at(k, s);
      logits[static_cast<size_t>(s)] = acc;
      mx = std::max(mx, acc);
    }
    double denom = 0;
    for (int s = 0; s < a; ++s) denom += std::exp(logits[static_cast<size_t>(s)] - mx);
    for (int s = 0; s < a; ++s)
      expect[i][static_cast<size_t>(s)] = std::exp(logits[static_cast<size_t>(s)] - mx) / denom;
  }

  // ---- implementation ----
  Graph<float> g(false);
  const Tensor<float> got = g.tape().value(bcn(g, g.input(input)).probs);
  for (int i = 0; i < t; ++i)
    for (int s = 0; s < a; ++s)
      CHECK(std::abs(got.at(i, s) - expect[i][static_cast<size_t>(s)]) < 1e-5);
}

TEST_CASE("bcn output rows are normalized; bad inputs rejected") {
  LmConfig cfg = tiny_lm(4, 2, 2, 8);
  Rng rng(17);
  Bcn bcn(cfg, rng);
  Rng drng(19);
  const Tensor<float> input = random_distributions(4, cfg.alphabet.size(), drng);

  Graph<float> g(false);
  const Tensor<float> probs = g.tape().value(bcn(g, g.input(input)).probs);
  for (int i = 0; i < 4; ++i) {
    double sum = 0;
    for (int j = 0; j < cfg.alphabet.size(); ++j) {
      CHECK(probs.at(i, j) >= 0.f);
      sum += probs.at(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }

  // non-normalized rows violate the input contract
  Tensor<float> bad = input;
  bad.at(1, 3) += 0.25f;
  Graph<float> g2(false);
  CHECK_THROWS_AS(bcn(g2, g2.input(bad)), ValueError);
}

TEST_CASE("fusion gate: range, convexity, agreement case") {
  const int dim = 8;
  Rng rng(23);
  Alphabet alphabet;
  FusionGate fuse(dim, alphabet.size(), rng);

  Rng drng(29);
  Tensor<float> f_v({5, dim}), f_l({5, dim});
  for (auto& v : f_v.data()) v = static_cast<float>(drng.uniform(-2, 2));
  for (auto& v : f_l.data()) v = static_cast<float>(drng.uniform(-2, 2));

  Graph<float> g(false);
  auto out = fuse(g, g.input(f_v), g.input(f_l));
  const Tensor<float>& gate = g.tape().value(out.gate);
  const Tensor<float>& fused = g.tape().value(out.features);
  for (int64_t i = 0; i < gate.numel(); ++i) {
    CHECK(gate[i] > 0.f);
    CHECK(gate[i] < 1.f);
    // per-element convex combination
    const float lo = std::min(f_v[i], f_l[i]);
    const float hi = std::max(f_v[i], f_l[i]);
    CHECK(fused[i] >= lo - 1e-6f);
    CHECK(fused[i] <= hi + 1e-6f);
  }

  // identical branches pass through for any gate
  Graph<float> g2(false);
  auto same = fuse(g2, g2.input(f_v), g2.input(f_v));
  const Tensor<float>& fused_same = g2.tape().value(same.features);
  for (int64_t i = 0; i < fused_same.numel(); ++i)
    CHECK(fused_same[i] == doctest::Approx(f_v[i]).epsilon(1e-6));

  // dimension mismatch is a config error
  Graph<float> g3(false);
  Tensor<float> wrong({5, dim + 2});
  CHECK_THROWS_AS(fuse(g3, g3.input(f_v), g3.input(wrong)), ConfigError);
}

TEST_CASE("iterative refinement loop") {
  LmConfig cfg = tiny_lm(4, 1, 2, 8);
  Rng rng(31);
  Refiner refiner(cfg, rng);

  // fabricate a vision output
  Rng drng(37);
  VisionOutput vision;
  vision.char_probs = random_distributions(4, cfg.alphabet.size(), drng);
  vision.features = Tensor<float>({4, 8});
  for (auto& v : vision.features.data()) v = static_cast<float>(drng.uniform(-1, 1));

  // M = 0 bypass: identical distributions, empty trace
  const Refiner::Result r0 = refiner.refine(vision, 0);
  CHECK(r0.fused_trace.empty());
  for (int64_t i = 0; i < vision.char_probs.numel(); ++i)
    CHECK(r0.final_probs[i] == vision.char_probs[i]);

  // trace length equals the iteration count
  for (int m : {1, 2, 3}) {
    const Refiner::Result r = refiner.refine(vision, m);
    CHECK(static_cast<int>(r.fused_trace.size()) == m);
    CHECK(static_cast<int>(r.lm_trace.size()) == m);
    // final == last fused
    for (int64_t i = 0; i < r.final_probs.numel(); ++i)
      CHECK(r.final_probs[i] == r.fused_trace.back()[i]);
  }

  // deterministic across calls
  const Refiner::Result a = refiner.refine(vision, 3);
  const Refiner::Result b = refiner.refine(vision, 3);
  for (int64_t i = 0; i < a.final_probs.numel(); ++i)
    CHECK(a.final_probs[i] == b.final_probs[i]);
}

TEST_CASE("decode_string") {
  Alphabet alphabet;
  const int a = alphabet.size();
  const int iA = alphabet.index_of('A');
  const int iB = alphabet.index_of('B');
  const int i1 = alphabet.index_of('1');

  // one-hot rows spelling "AB1" + EOS
  Tensor<float> d({5, a});
  d.at(0, iA) = 1.f;
  d.at(1, iB) = 1.f;
  d.at(2, i1) = 1.f;
  d.at(3, Alphabet::kEos) = 1.f;
  d.at(4, Alphabet::kPad) = 1.f;
  CHECK(decode_string(d, alphabet) == "AB1");

  // EOS at row 0 -> empty string
  Tensor<float> e({3, a});
  e.at(0, Alphabet::kEos) = 1.f;
  e.at(1, iA) = 1.f;
  e.at(2, iA) = 1.f;
  CHECK(decode_string(e, alphabet) == "");

  // exact tie: the lower alphabet index wins
  Tensor<float> tie({2, a});
  tie.at(0, iA) = 0.5f;
  tie.at(0, iB) = 0.5f;
  tie.at(1, Alphabet::kEos) = 1.f;
  CHECK(decode_string(tie, alphabet) == "A");

  // PAD rows are skipped, never emitted
  Tensor<float> pads({3, a});
  pads.at(0, Alphabet::kPad) = 1.f;
  pads.at(1, iB) = 1.f;
  pads.at(2, Alphabet::kEos) = 1.f;
  CHECK(decode_string(pads, alphabet) == "B");
}
