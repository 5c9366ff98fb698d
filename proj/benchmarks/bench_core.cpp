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

#include <benchmark/benchmark.h>

#include "platekit/pipeline.hpp"

namespace bm = benchmark;
using namespace platekit;

namespace {

VmConfig bench_vm() {
  VmConfig cfg;
  cfg.input_h = 32;
  cfg.input_w = 96;
  cfg.widths = {16, 32, 64};
  cfg.strides = {2, 2, 2};
  cfg.dim = 64;
  cfg.tf_layers = 1;
  cfg.tf_heads = 4;
  cfg.max_len = 9;
  return cfg;
}

LmConfig bench_lm() {
  LmConfig cfg;
  cfg.layers = 1;
  cfg.heads = 4;
  cfg.dim = 64;
  cfg.max_len = 9;
  cfg.iterations = 3;
  return cfg;
}

Tensor<float> random_image(int h, int w, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({h, w, c});
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform());
  return t;
}

}  // namespace

static void BM_Gemm(bm::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const int n = static_cast<int>(state.range(2));
  Rng rng(1);
  Tensor<float> a({m, k}), b({k, n}), c({m, n});
  for (auto& v : a.data()) v = static_cast<float>(rng.uniform());
  for (auto& v : b.data()) v = static_cast<float>(rng.uniform());
  for (auto _ : state) {
    c.fill(0.f);
    kernels::gemm_acc(a.ptr(), b.ptr(), c.ptr(), m, k, n);
    bm::DoNotOptimize(c.ptr());
  }
  state.counters["GFLOP/s"] =
      bm::Counter(2.0 * m * k * n, bm::Counter::kIsIterationInvariantRate, bm::Counter::kIs1000);
}
BENCHMARK(BM_Gemm)->Args({768, 144, 64})->Args({192, 288, 32})->Args({48, 64, 64});

static void BM_Conv2dForward(bm::State& state) {
  Rng rng(2);
  Tensor<float> x = random_image(32, 96, 16, 3);
  Tensor<float> w({3, 3, 16, 16});
  for (auto& v : w.data()) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  for (auto _ : state) {
    Tape<float> t;
    t.set_grad_enabled(false);
    auto y = conv2d(t.constant(x), t.constant(w), 1, 1);
    bm::DoNotOptimize(y.value().ptr());
  }
}
BENCHMARK(BM_Conv2dForward);

static void BM_RecognizerPredict(bm::State& state) {
  Recognizer rec(bench_vm(), bench_lm(), 7);
  const Tensor<float> img = random_image(32, 96, 3, 11);
  const int iterations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto p = rec.predict(img, iterations);
    bm::DoNotOptimize(p.text.data());
  }
}
BENCHMARK(BM_RecognizerPredict)->Arg(0)->Arg(3);

static void BM_RecognizerTrainStep(bm::State& state) {
  VmConfig vm = bench_vm();
  Recognizer rec(vm, bench_lm(), 7);
  const Tensor<float> img = random_image(32, 96, 3, 13);
  const std::vector<int> targets = vm.alphabet.encode("ABC1234", vm.max_len);
  for (auto _ : state) {
    Graph<float> g;
    VisionVars vars = rec.vision().forward(g, g.input(img));
    Var<float> loss = cross_entropy(vars.char_logits, targets, Alphabet::kPad);
    const auto steps = rec.refiner().refine_on_graph(g, vars.char_probs.value(), vars.f_v, 3);
    for (const auto& s : steps) {
      loss = add(loss, cross_entropy(s.lm.logits, targets, Alphabet::kPad));
      loss = add(loss, cross_entropy(s.fused.logits, targets, Alphabet::kPad));
    }
    g.backward(loss);
    bm::DoNotOptimize(loss.tape);
  }
}
BENCHMARK(BM_RecognizerTrainStep);

static void BM_DetectorPredict(bm::State& state) {
  DetectorConfig cfg;
  Rng rng(17);
  DetectorNet net(cfg, rng);
  const Tensor<float> img = random_image(cfg.input, cfg.input, 3, 19);
  for (auto _ : state) {
    const Tensor<float> grid = net.predict_grid(img);
    bm::DoNotOptimize(grid.ptr());
  }
}
BENCHMARK(BM_DetectorPredict);

static void BM_BcnForward(bm::State& state) {
  LmConfig cfg = bench_lm();
  Rng rng(23);
  Bcn bcn(cfg, rng);
  Rng drng(29);
  Tensor<float> probs({cfg.max_len, cfg.alphabet.size()});
  for (int i = 0; i < cfg.max_len; ++i) {
    double sum = 0;
    for (int j = 0; j < cfg.alphabet.size(); ++j) {
      probs.at(i, j) = static_cast<float>(drng.uniform(0.01, 1.0));
      sum += probs.at(i, j);
    }
    for (int j = 0; j < cfg.alphabet.size(); ++j)
      probs.at(i, j) = static_cast<float>(probs.at(i, j) / sum);
  }
  for (auto _ : state) {
    Graph<float> g(false);
    auto out = bcn(g, g.input(probs));
    bm::DoNotOptimize(out.probs.tape);
  }
}
BENCHMARK(BM_BcnForward);

static void BM_NMS(bm::State& state) {
  Rng rng(31);
  std::vector<Detection> dets;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
    dets.push_back({BBox{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3),
                         rng.uniform(0.05, 0.3)},
                    rng.uniform(0.0, 1.0)});
  for (auto _ : state) {
    auto kept = nms(dets, 0.45);
    bm::DoNotOptimize(kept.data());
  }
}
BENCHMARK(BM_NMS)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
