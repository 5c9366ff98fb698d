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

#include "platekit/autodiff.hpp"
#include "platekit/nn.hpp"
#include "platekit/optim.hpp"
#include "support/gradcheck.hpp"

using namespace platekit;
using platekit::testing::gradcheck_max_error;
using platekit::testing::random_tensor;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr float kInfF = std::numeric_limits<float>::infinity();
}  // namespace

TEST_CASE("tensor invariants") {
  Tensor<float> t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.shape() == Shape{2, 3});
  CHECK_THROWS_AS(Tensor<float>({0, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, {1.f, 2.f, 3.f}), ShapeError);
  CHECK_THROWS_AS(t.reshaped({5}), ShapeError);
  Tensor<float> r = t.reshaped({3, 2});
  CHECK(r.shape() == Shape{3, 2});
}

TEST_CASE("matmul examples") {
  Tape<float> t;
  // identity(3) x A == A
  Tensor<float> id({3, 3});
  for (int i = 0; i < 3; ++i) id.at(i, i) = 1.f;
  Tensor<float> a({3, 2}, {1, 2, 3, 4, 5, 6});
  auto va = t.constant(a);
  auto out = matmul(t.constant(id), va);
  for (int64_t i = 0; i < 6; ++i) CHECK(out.value()[i] == a[i]);

  // A x zeros == zeros
  auto z = matmul(va, t.constant(Tensor<float>({2, 4})));
  for (int64_t i = 0; i < z.value().numel(); ++i) CHECK(z.value()[i] == 0.f);

  // hand computation
  auto c = matmul(t.constant(Tensor<float>({2, 2}, {1, 2, 3, 4})),
                  t.constant(Tensor<float>({2, 1}, {5, 6})));
  CHECK(c.value()[0] == doctest::Approx(17));
  CHECK(c.value()[1] == doctest::Approx(39));

  CHECK_THROWS_AS(matmul(va, va), ShapeError);
}

TEST_CASE("softmax examples") {
  Tape<double> t;
  // constant row -> uniform
  auto u = softmax(t.constant(Tensor<double>::full({1, 4}, 3.25)), -1);
  for (int j = 0; j < 4; ++j) CHECK(u.value()[j] == doctest::Approx(0.25));

  // shift invariance
  Tensor<double> row({1, 3}, {0.3, -1.2, 2.0});
  Tensor<double> shifted({1, 3}, {0.3 + 7.5, -1.2 + 7.5, 2.0 + 7.5});
  auto s0 = softmax(t.constant(row), 1);
  auto s1 = softmax(t.constant(shifted), 1);
  for (int j = 0; j < 3; ++j) CHECK(s0.value()[j] == doctest::Approx(s1.value()[j]).epsilon(1e-12));

  // closed form: [0, ln2, ln4] -> [1/7, 2/7, 4/7]
  auto s = softmax(t.constant(Tensor<double>({1, 3}, {0.0, std::log(2.0), std::log(4.0)})), -1);
  CHECK(s.value()[0] == doctest::Approx(1.0 / 7).epsilon(1e-9));
  CHECK(s.value()[1] == doctest::Approx(2.0 / 7).epsilon(1e-9));
  CHECK(s.value()[2] == doctest::Approx(4.0 / 7).epsilon(1e-9));

  // -inf maps to exactly 0
  auto m = softmax(t.constant(Tensor<double>({1, 3}, {0.0, -kInf, 1.0})), -1);
  CHECK(m.value()[1] == 0.0);

  // degenerate all -inf slice
  CHECK_THROWS_AS(softmax(t.constant(Tensor<double>({1, 2}, {-kInf, -kInf})), -1), ValueError);
}

TEST_CASE("softmax normalization property over axes") {
  Rng rng(7);
  Tape<float> t;
  Tensor<float> x = random_tensor<float>({3, 4, 5}, rng, -4.0, 4.0);
  for (int axis = 0; axis < 3; ++axis) {
    auto y = softmax(t.constant(x), axis);
    const auto& shape = y.value().shape();
    // sum over the axis must be 1 for every slice
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    for (int i = axis + 1; i < 3; ++i) inner *= shape[i];
    const int n = shape[axis];
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t in = 0; in < inner; ++in) {
        double sum = 0;
        for (int j = 0; j < n; ++j) {
          const float v = y.value()[o * n * inner + j * inner + in];
          CHECK(v >= 0.f);
          CHECK(v <= 1.f);
          sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      }
  }
  CHECK_THROWS_AS(softmax(t.constant(x), 3), ShapeError);
}

namespace {

/// Naive sliding-window convolution with the documented (kh, kw, ci)
/// accumulation order; the implementation must match it bit for bit.
template <typename T>
Tensor<T> conv2d_oracle(const Tensor<T>& x, const Tensor<T>& w, int stride, int pad) {
  const int h = x.dim(0), iw = x.dim(1), ci = x.dim(2);
  const int kh = w.dim(0), kw = w.dim(1), co = w.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (iw + 2 * pad - kw) / stride + 1;
  Tensor<T> out({oh, ow, co});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int c = 0; c < co; ++c) {
        T acc = T(0);
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx)
            for (int cc = 0; cc < ci; ++cc) {
              const int iy = oy * stride + ky - pad;
              const int ix = ox * stride + kx - pad;
              if (iy < 0 || iy >= h || ix < 0 || ix >= iw) continue;
              acc += x.at(iy, ix, cc) * w.at(ky, kx, cc, c);
            }
        out.at(oy, ox, c) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("conv2d examples") {
  Tape<float> t;
  Rng rng(11);

  // 1x1 identity kernel: output equals input
  Tensor<float> x = random_tensor<float>({4, 6, 1}, rng);
  Tensor<float> id({1, 1, 1, 1}, {1.f});
  auto y = conv2d(t.constant(x), t.constant(id), 1, 0);
  CHECK(y.value().shape() == Shape{4, 6, 1});
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(y.value()[i] == x[i]);

  // all-ones 2x2 kernel on constant image: interior values are 4c
  const float c = 0.7f;
  auto yc = conv2d(t.constant(Tensor<float>::full({5, 5, 1}, c)),
                   t.constant(Tensor<float>::ones({2, 2, 1, 1})), 1, 1);
  CHECK(yc.value().shape() == Shape{6, 6, 1});
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 5; ++j) CHECK(yc.value().at(i, j, 0) == doctest::Approx(4 * c));

  // output extent law
  auto ys = conv2d(t.constant(Tensor<float>({9, 11, 2})), t.constant(Tensor<float>({3, 3, 2, 4})),
                   2, 1);
  CHECK(ys.value().shape() == Shape{(9 + 2 - 3) / 2 + 1, (11 + 2 - 3) / 2 + 1, 4});

  // kernel larger than padded input
  CHECK_THROWS_AS(conv2d(t.constant(Tensor<float>({2, 2, 1})),
                         t.constant(Tensor<float>({5, 5, 1, 1})), 1, 1),
                  ShapeError);
  // channel mismatch
  CHECK_THROWS_AS(conv2d(t.constant(Tensor<float>({4, 4, 2})),
                         t.constant(Tensor<float>({3, 3, 3, 1})), 1, 1),
                  ShapeError);
}

TEST_CASE("conv2d equals the naive oracle bit-for-bit") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(3, 9));
    const int w = static_cast<int>(rng.uniform_int(3, 9));
    const int ci = static_cast<int>(rng.uniform_int(1, 3));
    const int co = static_cast<int>(rng.uniform_int(1, 4));
    const int k = static_cast<int>(rng.uniform_int(1, 3));
    const int stride = static_cast<int>(rng.uniform_int(1, 2));
    const int pad = static_cast<int>(rng.uniform_int(0, 1));
    if (h + 2 * pad < k || w + 2 * pad < k) continue;
    Tensor<float> x = random_tensor<float>({h, w, ci}, rng);
    Tensor<float> kr = random_tensor<float>({k, k, ci, co}, rng);
    Tape<float> t;
    auto y = conv2d(t.constant(x), t.constant(kr), stride, pad);
    Tensor<float> ref = conv2d_oracle(x, kr, stride, pad);
    REQUIRE(y.value().shape() == ref.shape());
    for (int64_t i = 0; i < ref.numel(); ++i) CHECK(y.value()[i] == ref[i]);
  }
}

TEST_CASE("layer_norm examples") {
  Tape<double> t;
  auto gain = t.constant(Tensor<double>::ones({4}));
  auto bias = t.constant(Tensor<double>({4}));

  // constant row -> zeros
  auto z = layer_norm(t.constant(Tensor<double>::full({1, 4}, 5.0)), gain, bias);
  for (int j = 0; j < 4; ++j) CHECK(z.value()[j] == doctest::Approx(0.0).epsilon(1e-12));

  // [-1, 1]: already zero-mean, unit variance up to the eps correction
  auto g2 = t.constant(Tensor<double>::ones({2}));
  auto b2 = t.constant(Tensor<double>({2}));
  auto y = layer_norm(t.constant(Tensor<double>({1, 2}, {-1.0, 1.0})), g2, b2, 1e-5);
  const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(y.value()[0] == doctest::Approx(-expect).epsilon(1e-12));
  CHECK(y.value()[1] == doctest::Approx(expect).epsilon(1e-12));

  // affine after normalization
  auto gv = t.constant(Tensor<double>({2}, {2.0, 3.0}));
  auto bv = t.constant(Tensor<double>({2}, {-1.0, 0.5}));
  auto ya = layer_norm(t.constant(Tensor<double>({1, 2}, {-1.0, 1.0})), gv, bv, 1e-5);
  CHECK(ya.value()[0] == doctest::Approx(-expect * 2.0 - 1.0).epsilon(1e-12));
  CHECK(ya.value()[1] == doctest::Approx(expect * 3.0 + 0.5).epsilon(1e-12));

  CHECK_THROWS_AS(layer_norm(t.constant(Tensor<double>({1, 3})), gain, bias), ShapeError);
}

TEST_CASE("layer_norm normalizes rows within 1e-5") {
  Rng rng(23);
  Tape<float> t;
  Tensor<float> x = random_tensor<float>({6, 32}, rng, -3.0, 3.0);
  auto y = layer_norm(t.constant(x), t.constant(Tensor<float>::ones({32})),
                      t.constant(Tensor<float>({32})));
  for (int r = 0; r < 6; ++r) {
    double mean = 0, var = 0;
    for (int j = 0; j < 32; ++j) mean += y.value().at(r, j);
    mean /= 32;
    for (int j = 0; j < 32; ++j) {
      const double d = y.value().at(r, j) - mean;
      var += d * d;
    }
    var /= 32;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(var - 1.0) < 1e-3);  // eps shifts variance slightly below 1
  }
}

TEST_CASE("cross_entropy examples") {
  Tape<double> t;
  // certain prediction -> loss ~ 0
  Tensor<double> sure({1, 3});
  sure.at(0, 1) = 100.0;
  auto l0 = cross_entropy(t.constant(sure), {1}, -1);
  CHECK(l0.value()[0] == doctest::Approx(0.0).epsilon(1e-9));

  // uniform logits -> ln A
  auto lu = cross_entropy(t.constant(Tensor<double>({2, 5})), {0, 3}, -1);
  CHECK(lu.value()[0] == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  // random case vs scalar oracle
  Rng rng(31);
  Tensor<double> logits = random_tensor<double>({4, 5}, rng, -2.0, 2.0);
  std::vector<int> targets{2, 0, -1, 4};  // row 2 ignored
  auto l = cross_entropy(t.constant(logits), targets, -1);
  double expect = 0;
  int count = 0;
  for (int i = 0; i < 4; ++i) {
    if (targets[i] < 0) continue;
    double mx = logits.at(i, 0);
    for (int j = 1; j < 5; ++j) mx = std::max(mx, logits.at(i, j));
    double sum = 0;
    for (int j = 0; j < 5; ++j) sum += std::exp(logits.at(i, j) - mx);
    expect += mx + std::log(sum) - logits.at(i, targets[i]);
    ++count;
  }
  expect /= count;
  CHECK(l.value()[0] == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(cross_entropy(t.constant(logits), {-1, -1, -1, -1}, -1), ValueError);
  CHECK_THROWS_AS(cross_entropy(t.constant(logits), {9, 0, 0, 0}, -1), ValueError);
}

TEST_CASE("backward basics") {
  // loss = sum(x) -> grad(x) = ones
  {
    Tape<float> t;
    auto x = t.leaf(Tensor<float>({2, 3}, {1, 2, 3, 4, 5, 6}), true);
    t.backward(sum_all(x));
    for (int64_t i = 0; i < 6; ++i) CHECK(t.grad(x)[i] == 1.f);
  }
  // loss = x . y -> grad(x) = y
  {
    Tape<float> t;
    Tensor<float> yv({3}, {2, -1, 4});
    auto x = t.leaf(Tensor<float>({3}, {1, 1, 1}), true);
    t.backward(sum_all(mul(x, t.constant(yv))));
    for (int64_t i = 0; i < 3; ++i) CHECK(t.grad(x)[i] == yv[i]);
  }
  // non-scalar backward is an error
  {
    Tape<float> t;
    auto x = t.leaf(Tensor<float>({2, 2}), true);
    CHECK_THROWS_AS(t.backward(scale(x, 2.f)), ShapeError);
  }
  // tape is consumed after backward; reset() restores it
  {
    Tape<float> t;
    auto x = t.leaf(Tensor<float>({1}), true);
    auto l = sum_all(x);
    t.backward(l);
    CHECK_THROWS_AS(t.backward(l), Error);
    CHECK_THROWS_AS(t.leaf(Tensor<float>({1}), false), Error);
    t.reset();
    auto x2 = t.leaf(Tensor<float>({1}), true);
    t.backward(sum_all(x2));
    CHECK(t.grad(x2)[0] == 1.f);
  }
  // grad shape matches value shape
  {
    Tape<float> t;
    auto x = t.leaf(Tensor<float>({3, 4}), true);
    t.backward(mean_all(x));
    CHECK(t.grad(x).shape() == Shape{3, 4});
  }
}

TEST_CASE("gradcheck across the op set (f64 spot suite)") {
  Rng rng(1234);
  auto rt = [&](Shape s) { return random_tensor<double>(std::move(s), rng, -1.0, 1.0); };

  auto check = [&](const char* name, testing::LossBuilder<double> fn,
                   std::vector<Tensor<double>> inputs) {
    const double err = gradcheck_max_error<double>(fn, std::move(inputs));
    INFO(std::string(name));
    CHECK(err < 1e-5);
  };

  // weighted-sum head so every output element feeds the scalar loss; the
  // weights are a pure function of the shape so repeated forwards agree
  auto head = [](Graph<double>& g, Var<double> y) {
    Rng wr(99);
    Tensor<double> w(y.value().shape());
    for (auto& v : w.data()) v = wr.uniform(-1.0, 1.0);
    return sum_all(mul(y, g.constant(w)));
  };

  check("add", [&](Graph<double>& g, const auto& in) {
    return head(g, add(g.param(in[0]), g.param(in[1])));
  }, {rt({3, 4}), rt({3, 4})});

  check("sub", [&](Graph<double>& g, const auto& in) {
    return head(g, sub(g.param(in[0]), g.param(in[1])));
  }, {rt({3, 4}), rt({3, 4})});

  check("mul", [&](Graph<double>& g, const auto& in) {
    return head(g, mul(g.param(in[0]), g.param(in[1])));
  }, {rt({2, 5}), rt({2, 5})});

  check("scale", [&](Graph<double>& g, const auto& in) {
    return head(g, scale(g.param(in[0]), 1.7));
  }, {rt({4})});

  check("add_lastdim", [&](Graph<double>& g, const auto& in) {
    return head(g, add_lastdim(g.param(in[0]), g.param(in[1])));
  }, {rt({2, 3, 4}), rt({4})});

  check("matmul", [&](Graph<double>& g, const auto& in) {
    return head(g, matmul(g.param(in[0]), g.param(in[1])));
  }, {rt({3, 4}), rt({4, 2})});

  check("transpose", [&](Graph<double>& g, const auto& in) {
    return head(g, transpose(g.param(in[0])));
  }, {rt({3, 5})});

  check("reshape", [&](Graph<double>& g, const auto& in) {
    return head(g, reshape(g.param(in[0]), {6, 2}));
  }, {rt({3, 4})});

  check("slice_cols", [&](Graph<double>& g, const auto& in) {
    return head(g, slice_cols(g.param(in[0]), 1, 4));
  }, {rt({3, 5})});

  check("concat_cols", [&](Graph<double>& g, const auto& in) {
    std::vector<Var<double>> parts{g.param(in[0]), g.param(in[1])};
    return head(g, concat_cols(parts));
  }, {rt({3, 2}), rt({3, 4})});

  // keep relu inputs away from the kink
  Tensor<double> roff({3, 4});
  for (auto& v : roff.data()) v = (rng.chance(0.5) ? 1 : -1) * rng.uniform(0.2, 1.0);
  check("relu", [&](Graph<double>& g, const auto& in) {
    return head(g, relu(g.param(in[0])));
  }, {roff});

  check("gelu", [&](Graph<double>& g, const auto& in) {
    return head(g, gelu(g.param(in[0])));
  }, {rt({3, 4})});

  check("sigmoid", [&](Graph<double>& g, const auto& in) {
    return head(g, sigmoid(g.param(in[0])));
  }, {rt({3, 4})});

  check("exp", [&](Graph<double>& g, const auto& in) {
    return head(g, exp_(g.param(in[0])));
  }, {rt({3, 4})});

  check("softmax", [&](Graph<double>& g, const auto& in) {
    return head(g, softmax(g.param(in[0]), -1));
  }, {rt({4, 6})});

  check("softmax axis0", [&](Graph<double>& g, const auto& in) {
    return head(g, softmax(g.param(in[0]), 0));
  }, {rt({4, 3})});

  check("layer_norm", [&](Graph<double>& g, const auto& in) {
    return head(g, layer_norm(g.param(in[0]), g.param(in[1]), g.param(in[2])));
  }, {rt({3, 8}), rt({8}), rt({8})});

  check("conv2d", [&](Graph<double>& g, const auto& in) {
    return head(g, conv2d(g.param(in[0]), g.param(in[1]), 1, 1));
  }, {rt({5, 5, 2}), rt({3, 3, 2, 3})});

  check("conv2d strided", [&](Graph<double>& g, const auto& in) {
    return head(g, conv2d(g.param(in[0]), g.param(in[1]), 2, 0));
  }, {rt({6, 6, 1}), rt({2, 2, 1, 2})});

  check("upsample_nearest2x", [&](Graph<double>& g, const auto& in) {
    return head(g, upsample_nearest2x(g.param(in[0])));
  }, {rt({3, 4, 2})});

  check("embedding", [&](Graph<double>& g, const auto& in) {
    return head(g, embedding(g.param(in[0]), {2, 0, 2, 1}));
  }, {rt({4, 3})});

  check("sum_all", [&](Graph<double>& g, const auto& in) {
    return sum_all(g.param(in[0]));
  }, {rt({3, 4})});

  check("mean_all", [&](Graph<double>& g, const auto& in) {
    return mean_all(g.param(in[0]));
  }, {rt({3, 4})});

  check("cross_entropy", [&](Graph<double>& g, const auto& in) {
    return cross_entropy(g.param(in[0]), {1, -1, 0, 2}, -1);
  }, {rt({4, 4})});
}

TEST_CASE("forward on finite inputs stays finite") {
  Rng rng(55);
  Tape<float> t;
  Tensor<float> x = random_tensor<float>({6, 8}, rng, -5.0, 5.0);
  auto v = t.constant(x);
  auto chain = layer_norm(softmax(gelu(matmul(v, transpose(v))), -1),
                          t.constant(Tensor<float>::ones({6})), t.constant(Tensor<float>({6})));
  CHECK(chain.value().all_finite());
}

TEST_CASE("adam optimizer") {
  // zero grads leave parameters unchanged
  {
    Adam<float> opt;
    Tensor<float> p({3}, {1, 2, 3});
    Tensor<float> g({3});
    opt.step({&p}, {&g});
    CHECK(p[0] == 1.f);
    CHECK(p[1] == 2.f);
    CHECK(p[2] == 3.f);
  }
  // one step on f(w)=w^2 from w=1 decreases f
  {
    Adam<float> opt;
    Tensor<float> w({1}, {1.f});
    Tensor<float> g({1}, {2.f});  // df/dw at w=1
    opt.step({&w}, {&g});
    CHECK(w[0] < 1.f);
    CHECK(w[0] * w[0] < 1.f);
  }
  // deterministic across runs
  {
    auto run = [] {
      Rng rng(77);
      Adam<float> opt;
      Tensor<float> w = random_tensor<float>({8}, rng);
      for (int i = 0; i < 10; ++i) {
        Tensor<float> g({8});
        for (int64_t j = 0; j < 8; ++j) g[j] = 2.f * w[j] + static_cast<float>(rng.uniform());
        opt.step({&w}, {&g});
      }
      return w;
    };
    Tensor<float> a = run(), b = run();
    for (int64_t j = 0; j < 8; ++j) CHECK(a[j] == b[j]);
  }
  // missing / mis-shaped gradients are errors
  {
    Adam<float> opt;
    Tensor<float> p({2});
    CHECK_THROWS_AS(opt.step({&p}, {nullptr}), Error);
    Tensor<float> bad({3});
    Adam<float> opt2;
    CHECK_THROWS_AS(opt2.step({&p}, {&bad}), ShapeError);
  }
}

TEST_CASE("misc op semantics") {
  Tape<float> t;
  // upsample doubles extents with nearest fill
  Tensor<float> x({1, 2, 1}, {3.f, 7.f});
  auto u = upsample_nearest2x(t.constant(x));
  CHECK(u.value().shape() == Shape{2, 4, 1});
  CHECK(u.value().at(0, 0, 0) == 3.f);
  CHECK(u.value().at(1, 1, 0) == 3.f);
  CHECK(u.value().at(0, 2, 0) == 7.f);
  CHECK(u.value().at(1, 3, 0) == 7.f);

  // slice/concat round trip
  Rng rng(3);
  Tensor<float> m = random_tensor<float>({3, 6}, rng);
  auto vm = t.constant(m);
  std::vector<Var<float>> parts{slice_cols(vm, 0, 2), slice_cols(vm, 2, 6)};
  auto back = concat_cols(parts);
  for (int64_t i = 0; i < m.numel(); ++i) CHECK(back.value()[i] == m[i]);

  // embedding gathers rows; bad index throws
  Tensor<float> w({3, 2}, {0, 1, 10, 11, 20, 21});
  auto e = embedding(t.constant(w), {2, 0});
  CHECK(e.value().at(0, 0) == 20.f);
  CHECK(e.value().at(1, 1) == 1.f);
  CHECK_THROWS_AS(embedding(t.constant(w), {3}), ValueError);

  // sigmoid/gelu spot values
  auto sg = sigmoid(t.constant(Tensor<float>({1}, {0.f})));
  CHECK(sg.value()[0] == doctest::Approx(0.5));
  auto gl = gelu(t.constant(Tensor<float>({1}, {0.f})));
  CHECK(gl.value()[0] == doctest::Approx(0.0));
}
