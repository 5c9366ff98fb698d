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

// Training loops. Batch samples run on independent tapes in parallel; their
// gradients are reduced in sample order, so results do not depend on the
// worker count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "platekit/optim.hpp"
#include "platekit/pipeline.hpp"
#include "platekit/thread.hpp"

namespace fs = std::filesystem;

namespace platekit {

namespace {

struct FlatParams {
  ParamList<float> list;
  std::vector<size_t> offset;
  size_t total = 0;

  explicit FlatParams(ParamList<float> params) : list(std::move(params)) {
    offset.reserve(list.size());
    for (const auto& p : list) {
      offset.push_back(total);
      total += static_cast<size_t>(p.tensor->numel());
    }
  }
};

/// Copies this evaluation's parameter gradients into a flat buffer
/// (zero where a parameter was never touched).
void extract_grads(const Graph<float>& g, const FlatParams& fp, std::vector<float>& dst) {
  dst.assign(fp.total, 0.f);
  for (size_t j = 0; j < fp.list.size(); ++j) {
    const Tensor<float>* grad = g.grad_for(*fp.list[j].tensor);
    if (grad == nullptr) continue;
    std::copy(grad->data().begin(), grad->data().end(), dst.begin() + static_cast<long>(fp.offset[j]));
  }
}

std::vector<int> shuffled_indices(size_t n, Rng& rng) {
  std::vector<int> ix(n);
  for (size_t i = 0; i < n; ++i) ix[i] = static_cast<int>(i);
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(ix[i - 1], ix[j]);
  }
  return ix;
}

struct TrainItem {
  const ManifestRecord* record;
  size_t box_ix;
  int image_ix;  // into the image cache
};

struct ItemSet {
  std::vector<TrainItem> items;
  std::vector<Image> images;  // one per unique record image
};

ItemSet load_items(const Manifest& manifest, const std::string& split, int threads) {
  ItemSet set;
  std::vector<const ManifestRecord*> recs = manifest.split_records(split);
  if (recs.empty()) throw ConfigError("no '" + split + "' records in manifest");
  set.images.resize(recs.size());
  parallel_for(static_cast<int64_t>(recs.size()), threads, [&](int64_t i) {
    set.images[static_cast<size_t>(i)] = read_pnm(manifest.image_path(*recs[static_cast<size_t>(i)]));
  });
  for (size_t i = 0; i < recs.size(); ++i)
    for (size_t b = 0; b < recs[i]->boxes.size(); ++b)
      set.items.push_back({recs[i], b, static_cast<int>(i)});
  return set;
}

struct EpochLog {
  std::ostringstream lines;
  std::ostream* echo;

  void line(const std::string& s) {
    lines << s << "\n";
    if (echo != nullptr) *echo << s << "\n" << std::flush;
  }
};

void write_log_file(const std::string& path, const EpochLog& log) {
  std::ofstream out(path, std::ios::trunc);
  out << log.lines.str();
}

/// Jittered truth-box crop for training; the eval path uses the fixed margin.
Tensor<float> train_crop(const Image& img, const BBox& box, double base_margin, double jitter,
                         const VmConfig& vm, Rng& rng) {
  BBox b = box;
  double margin = base_margin;
  if (jitter > 0) {
    b.x = std::clamp(b.x + rng.uniform(-jitter, jitter) * b.w, 0.0, 1.0);
    b.y = std::clamp(b.y + rng.uniform(-jitter, jitter) * b.h, 0.0, 1.0);
    margin = std::max(0.0, base_margin + rng.uniform(-jitter, jitter));
  }
  return record_crop(img, b, margin, vm);
}

}  // namespace

// ---------------------------------------------------------------------------
// Recognizer training
// ---------------------------------------------------------------------------

TrainResult cmd_train_recognizer(const RunConfig& cfg, std::ostream& log_stream) {
  if (cfg.manifest.empty() || !fs::exists(cfg.manifest))
    throw ConfigError("train-recognizer: manifest missing: " + cfg.manifest);
  const Manifest manifest = read_manifest(cfg.manifest);

  Recognizer rec(cfg.vm, cfg.lm, cfg.seed);
  if (!cfg.train.init_from.empty()) rec.load(cfg.train.init_from);

  FlatParams fp(rec.params());
  Adam<float> opt({cfg.train.lr, 0.9, 0.999, 1e-8});

  const ItemSet train_set = load_items(manifest, "train", cfg.threads);
  const size_t n = train_set.items.size();
  const int batch = std::min<int>(cfg.train.batch, static_cast<int>(n));
  const int iterations = cfg.lm.iterations;
  const int pad = Alphabet::kPad;
  const int a_size = cfg.vm.alphabet.size();

  // optimizer grad buffers, reused across batches
  std::vector<Tensor<float>> grad_tensors;
  std::vector<Tensor<float>*> param_ptrs;
  std::vector<const Tensor<float>*> grad_ptrs;
  for (const auto& p : fp.list) {
    grad_tensors.emplace_back(p.tensor->shape());
    param_ptrs.push_back(p.tensor);
  }
  for (const auto& g : grad_tensors) grad_ptrs.push_back(&g);

  std::vector<std::vector<float>> sample_grads(static_cast<size_t>(batch));
  std::vector<double> sample_loss(static_cast<size_t>(batch));

  EpochLog log{{}, &log_stream};
  TrainResult result;
  double best_val = -1;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng::derived(cfg.seed, 1, static_cast<uint64_t>(epoch));
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);

    double epoch_loss = 0;
    int64_t seen = 0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(batch)) {
      const int bsz = static_cast<int>(std::min<size_t>(static_cast<size_t>(batch), n - start));
      parallel_for(bsz, cfg.threads, [&](int64_t bi) {
        const int idx = order[start + static_cast<size_t>(bi)];
        const TrainItem& item = train_set.items[static_cast<size_t>(idx)];
        Rng rng = Rng::derived(cfg.seed, 2,
                               static_cast<uint64_t>(epoch) * n + static_cast<uint64_t>(idx));

        const Tensor<float> input =
            train_crop(train_set.images[static_cast<size_t>(item.image_ix)],
                       item.record->boxes[item.box_ix], cfg.infer_margin, cfg.train.crop_jitter,
                       cfg.vm, rng);
        const std::vector<int> targets =
            cfg.vm.alphabet.encode(item.record->strings[item.box_ix], cfg.vm.max_len);

        Graph<float> g;
        VisionVars vars = rec.vision().forward(g, g.input(input));
        Var<float> loss = cross_entropy(vars.char_logits, targets, pad);

        // teacher inputs are the (noisy) predicted distributions; each
        // iteration's input rows are randomly replaced with prob lm_noise
        const double noise_p = cfg.train.lm_noise;
        auto filter = [&rng, noise_p, a_size](const Tensor<float>& dist, int) {
          Tensor<float> out = dist;
          for (int row = 0; row < out.dim(0); ++row) {
            if (!rng.chance(noise_p)) continue;
            const int sym = static_cast<int>(rng.uniform_int(1, a_size - 1));  // never PAD
            for (int j = 0; j < out.dim(1); ++j) out.at(row, j) = 0.f;
            out.at(row, sym) = 1.f;
          }
          return out;
        };
        const std::vector<RefineStep> steps =
            rec.refiner().refine_on_graph(g, vars.char_probs.value(), vars.f_v, iterations, filter);
        for (const RefineStep& step : steps) {
          loss = add(loss, cross_entropy(step.lm.logits, targets, pad));
          loss = add(loss, cross_entropy(step.fused.logits, targets, pad));
        }

        const double lv = loss.value()[0];
        if (!std::isfinite(lv)) throw Error("train-recognizer: non-finite loss (epoch " +
                                            std::to_string(epoch) + ")");
        sample_loss[static_cast<size_t>(bi)] = lv;
        g.backward(loss);
        extract_grads(g, fp, sample_grads[static_cast<size_t>(bi)]);
      });

      // reduce in sample order, then mean
      for (auto& gt : grad_tensors) gt.fill(0.f);
      for (int bi = 0; bi < bsz; ++bi) {
        const std::vector<float>& src = sample_grads[static_cast<size_t>(bi)];
        for (size_t j = 0; j < fp.list.size(); ++j) {
          Tensor<float>& gt = grad_tensors[j];
          const float* s = src.data() + fp.offset[j];
          for (int64_t k = 0; k < gt.numel(); ++k) gt[k] += s[k];
        }
        epoch_loss += sample_loss[static_cast<size_t>(bi)];
      }
      const float inv = 1.f / static_cast<float>(bsz);
      for (auto& gt : grad_tensors)
        for (float& v : gt.data()) v *= inv;
      opt.step(param_ptrs, grad_ptrs);
      seen += bsz;
    }

    const EvalReport val = recognizer_eval(rec, manifest, "val", iterations, cfg.infer_margin, "",
                                           cfg.threads);
    const double val_acc = val.plate_acc.value_or(0.0);
    char line[160];
    std::snprintf(line, sizeof(line), "epoch %d  loss %.4f  val_plate_acc %.4f  (%.1fs)", epoch,
                  epoch_loss / static_cast<double>(seen), val_acc,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    log.line(line);

    result.epochs_run = epoch;
    result.final_val_metric = val_acc;
    if (val_acc > best_val + 1e-6) {
      best_val = val_acc;
      best_epoch = epoch;
    }
    if (val_acc >= cfg.train.early_target) {
      log.line("early exit: val target reached");
      result.early_stopped = true;
      break;
    }
    if (cfg.train.early_patience > 0 && epoch - best_epoch >= cfg.train.early_patience) {
      log.line("early exit: val plate accuracy plateaued");
      result.early_stopped = true;
      break;
    }
  }

  fs::create_directories(cfg.out_dir);
  result.checkpoint = (fs::path(cfg.out_dir) / "recognizer.ckpt").string();
  rec.save(result.checkpoint);
  result.log_file = (fs::path(cfg.out_dir) / "train_recognizer.log").string();
  write_log_file(result.log_file, log);
  return result;
}

// ---------------------------------------------------------------------------
// Detector training
// ---------------------------------------------------------------------------

Rate detector_eval_map(const PlateDetector& det, const Manifest& manifest,
                       const std::string& split, double iou_thresh, double decode_thresh,
                       int threads) {
  const std::vector<const ManifestRecord*> recs = manifest.split_records(split);
  if (recs.empty()) return std::nullopt;
  std::vector<std::vector<Detection>> dets(recs.size());
  std::vector<std::vector<BBox>> truths(recs.size());
  parallel_for(static_cast<int64_t>(recs.size()), threads, [&](int64_t i) {
    const Image img = read_pnm(manifest.image_path(*recs[static_cast<size_t>(i)]));
    const DetectorConfig& cfg = det.config();
    Image resized = (img.h == cfg.input && img.w == cfg.input)
                        ? img
                        : resize_bilinear(img, cfg.input, cfg.input);
    const Tensor<float> grid = det.net().predict_grid(image_to_tensor(resized));
    dets[static_cast<size_t>(i)] = nms(decode_predictions(grid, decode_thresh, cfg), cfg.nms_iou);
    truths[static_cast<size_t>(i)] = recs[static_cast<size_t>(i)]->boxes;
  });
  return average_precision(dets, truths, iou_thresh);
}

TrainResult cmd_train_detector(const RunConfig& cfg, std::ostream& log_stream) {
  if (cfg.manifest.empty() || !fs::exists(cfg.manifest))
    throw ConfigError("train-detector: manifest missing: " + cfg.manifest);
  const Manifest manifest = read_manifest(cfg.manifest);

  PlateDetector det(cfg.det, cfg.seed + 1);
  if (!cfg.train.init_from.empty()) det.load(cfg.train.init_from);

  FlatParams fp(det.params());
  Adam<float> opt({cfg.train.lr, 0.9, 0.999, 1e-8});

  // cache resized inputs and target grids
  const std::vector<const ManifestRecord*> recs = manifest.split_records("train");
  if (recs.empty()) throw ConfigError("train-detector: no train records");
  const size_t n = recs.size();
  std::vector<Tensor<float>> inputs(n);
  std::vector<Tensor<float>> targets(n);
  parallel_for(static_cast<int64_t>(n), cfg.threads, [&](int64_t i) {
    const Image img = read_pnm(manifest.image_path(*recs[static_cast<size_t>(i)]));
    const Image resized = (img.h == cfg.det.input && img.w == cfg.det.input)
                              ? img
                              : resize_bilinear(img, cfg.det.input, cfg.det.input);
    inputs[static_cast<size_t>(i)] = image_to_tensor(resized);
    targets[static_cast<size_t>(i)] = encode_targets(recs[static_cast<size_t>(i)]->boxes, cfg.det);
  });

  const int batch = std::min<int>(cfg.train.batch, static_cast<int>(n));
  std::vector<Tensor<float>> grad_tensors;
  std::vector<Tensor<float>*> param_ptrs;
  std::vector<const Tensor<float>*> grad_ptrs;
  for (const auto& p : fp.list) {
    grad_tensors.emplace_back(p.tensor->shape());
    param_ptrs.push_back(p.tensor);
  }
  for (const auto& g : grad_tensors) grad_ptrs.push_back(&g);
  std::vector<std::vector<float>> sample_grads(static_cast<size_t>(batch));
  std::vector<double> sample_loss(static_cast<size_t>(batch));

  EpochLog log{{}, &log_stream};
  TrainResult result;
  double best_val = -1;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng::derived(cfg.seed, 3, static_cast<uint64_t>(epoch));
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);

    double epoch_loss = 0;
    int64_t seen = 0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(batch)) {
      const int bsz = static_cast<int>(std::min<size_t>(static_cast<size_t>(batch), n - start));
      parallel_for(bsz, cfg.threads, [&](int64_t bi) {
        const int idx = order[start + static_cast<size_t>(bi)];
        Graph<float> g;
        DetectorForward fwd = det.net().forward(g, g.input(inputs[static_cast<size_t>(idx)]));
        Var<float> loss = detection_loss(g, fwd, targets[static_cast<size_t>(idx)], cfg.det);
        const double lv = loss.value()[0];
        if (!std::isfinite(lv))
          throw Error("train-detector: non-finite loss (epoch " + std::to_string(epoch) + ")");
        sample_loss[static_cast<size_t>(bi)] = lv;
        g.backward(loss);
        extract_grads(g, fp, sample_grads[static_cast<size_t>(bi)]);
      });

      for (auto& gt : grad_tensors) gt.fill(0.f);
      for (int bi = 0; bi < bsz; ++bi) {
        const std::vector<float>& src = sample_grads[static_cast<size_t>(bi)];
        for (size_t j = 0; j < fp.list.size(); ++j) {
          Tensor<float>& gt = grad_tensors[j];
          const float* s = src.data() + fp.offset[j];
          for (int64_t k = 0; k < gt.numel(); ++k) gt[k] += s[k];
        }
        epoch_loss += sample_loss[static_cast<size_t>(bi)];
      }
      const float inv = 1.f / static_cast<float>(bsz);
      for (auto& gt : grad_tensors)
        for (float& v : gt.data()) v *= inv;
      opt.step(param_ptrs, grad_ptrs);
      seen += bsz;
    }

    const Rate val_map = detector_eval_map(det, manifest, "val", 0.5, 0.05, cfg.threads);
    const double val = val_map.value_or(0.0);
    char line[160];
    std::snprintf(line, sizeof(line), "epoch %d  loss %.4f  val_map50 %.4f  (%.1fs)", epoch,
                  epoch_loss / static_cast<double>(seen), val,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    log.line(line);

    result.epochs_run = epoch;
    result.final_val_metric = val;
    if (val > best_val + 1e-6) {
      best_val = val;
      best_epoch = epoch;
    }
    if (val >= cfg.train.early_target) {
      log.line("early exit: val target reached");
      result.early_stopped = true;
      break;
    }
    if (cfg.train.early_patience > 0 && epoch - best_epoch >= cfg.train.early_patience) {
      log.line("early exit: val mAP plateaued");
      result.early_stopped = true;
      break;
    }
  }

  fs::create_directories(cfg.out_dir);
  result.checkpoint = (fs::path(cfg.out_dir) / "detector.ckpt").string();
  det.save(result.checkpoint);
  result.log_file = (fs::path(cfg.out_dir) / "train_detector.log").string();
  write_log_file(result.log_file, log);
  return result;
}

}  // namespace platekit
