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

// Brute-force reference implementations, test-only. Each re-derives its
// result with explicit loops, independent of the library code paths it
// checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "platekit/language.hpp"
#include "platekit/metrics.hpp"
#include "platekit/tensor.hpp"

namespace platekit::testing {

/// Naive sliding-window convolution with the documented (kh, kw, ci)
/// accumulation order; conv2d must match it bit for bit.
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

/// O(n^2) greedy NMS reference (strict > suppression, stable confidence order).
inline std::vector<Detection> nms_bruteforce(std::vector<Detection> dets, double thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  std::vector<bool> removed(dets.size(), false);
  for (size_t i = 0; i < dets.size(); ++i) {
    if (removed[i]) continue;
    for (size_t j = i + 1; j < dets.size(); ++j) {
      if (removed[j]) continue;
      if (iou(dets[i].box, dets[j].box) > thresh) removed[j] = true;
    }
  }
  std::vector<Detection> kept;
  for (size_t i = 0; i < dets.size(); ++i)
    if (!removed[i]) kept.push_back(dets[i]);
  return kept;
}

/// Rebuilds the PR curve pointwise (one threshold per distinct confidence)
/// and integrates with all-points interpolation. Confidences must be distinct.
inline double ap_oracle(const std::vector<std::vector<Detection>>& dets_pi,
                        const std::vector<std::vector<BBox>>& truths_pi, double iou_thresh) {
  int64_t total_truths = 0;
  for (const auto& t : truths_pi) total_truths += static_cast<int64_t>(t.size());

  std::vector<double> thresholds;
  for (const auto& dets : dets_pi)
    for (const auto& d : dets) thresholds.push_back(d.confidence);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());

  std::vector<double> precisions, recalls;
  for (double c : thresholds) {
    int64_t tp = 0, npred = 0;
    for (size_t img = 0; img < dets_pi.size(); ++img) {
      std::vector<Detection> prefix;
      for (const auto& d : dets_pi[img])
        if (d.confidence >= c) prefix.push_back(d);
      npred += static_cast<int64_t>(prefix.size());
      std::stable_sort(prefix.begin(), prefix.end(), [](const Detection& a, const Detection& b) {
        return a.confidence > b.confidence;
      });
      std::vector<bool> used(truths_pi[img].size(), false);
      for (const auto& d : prefix) {
        double best = 0;
        int best_t = -1;
        for (size_t t = 0; t < truths_pi[img].size(); ++t) {
          if (used[t]) continue;
          const double o = iou(d.box, truths_pi[img][t]);
          if (o >= iou_thresh && o > best) {
            best = o;
            best_t = static_cast<int>(t);
          }
        }
        if (best_t >= 0) {
          used[static_cast<size_t>(best_t)] = true;
          ++tp;
        }
      }
    }
    precisions.push_back(static_cast<double>(tp) / static_cast<double>(npred));
    recalls.push_back(static_cast<double>(tp) / static_cast<double>(total_truths));
  }

  double ap = 0, prev_recall = 0;
  for (size_t k = 0; k < thresholds.size(); ++k) {
    double envelope = 0;
    for (size_t j = k; j < thresholds.size(); ++j) envelope = std::max(envelope, precisions[j]);
    ap += (recalls[k] - prev_recall) * envelope;
    prev_recall = recalls[k];
  }
  return ap;
}

/// Explicit-loop transcription of the single-head, single-layer BCN forward
/// (cloze-masked attention, post-LN residual blocks, classifier softmax),
/// reading the model parameters by name. Returns the refined distributions.
inline std::vector<std::vector<double>> bcn_oracle_probs(
    const std::map<std::string, const Tensor<float>*>& w, const Tensor<float>& input, int t, int c,
    int a, double eps = 1e-5) {
  auto mat = [&](const std::string& name) { return w.at(name); };

  std::vector<std::vector<double>> kv(static_cast<size_t>(t), std::vector<double>(c, 0.0));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j)
      for (int s = 0; s < a; ++s)
        kv[i][j] += static_cast<double>(input.at(i, s)) * mat("lm/wt")->at(s, j);

  std::vector<std::vector<double>> x(static_cast<size_t>(t), std::vector<double>(c));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < c; ++j) x[i][j] = mat("lm/queries")->at(i, j);

  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  std::vector<std::vector<double>> mha(static_cast<size_t>(t), std::vector<double>(c, 0.0));
  for (int i = 0; i < t; ++i) {
    std::vector<double> logits(static_cast<size_t>(t));
    double mx = -1e300;
    for (int j = 0; j < t; ++j) {
      if (j == i) continue;  // cloze mask: -inf at the diagonal
      double dot = 0;
      for (int k = 0; k < c; ++k) dot += x[i][k] * kv[j][k];
      logits[static_cast<size_t>(j)] = dot * scale;
      mx = std::max(mx, logits[static_cast<size_t>(j)]);
    }
    double denom = 0;
    std::vector<double> attn(static_cast<size_t>(t), 0.0);
    for (int j = 0; j < t; ++j) {
      if (j == i) continue;
      attn[static_cast<size_t>(j)] = std::exp(logits[static_cast<size_t>(j)] - mx);
      denom += attn[static_cast<size_t>(j)];
    }
    for (int j = 0; j < t; ++j) {
      if (j == i) continue;
      attn[static_cast<size_t>(j)] /= denom;
      for (int k = 0; k < c; ++k) mha[i][k] += attn[static_cast<size_t>(j)] * kv[j][k];
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

  const Tensor<float>* wc = mat("lm/classifier/w");
  const Tensor<float>* bc = mat("lm/classifier/b");
  std::vector<std::vector<double>> probs(static_cast<size_t>(t), std::vector<double>(a, 0.0));
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
      probs[i][static_cast<size_t>(s)] = std::exp(logits[static_cast<size_t>(s)] - mx) / denom;
  }
  return probs;
}

/// Random rows on the probability simplex.
inline Tensor<float> random_distributions(int t, int a, Rng& rng) {
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

}  // namespace platekit::testing
