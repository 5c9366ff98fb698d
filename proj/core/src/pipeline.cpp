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

#include "platekit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>

#include "platekit/thread.hpp"

namespace fs = std::filesystem;

namespace platekit {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not configured");
  if (!fs::exists(path)) throw ConfigError(what + " does not exist: " + path);
}

}  // namespace

// ---------------------------------------------------------------------------
// Recognizer
// ---------------------------------------------------------------------------

Recognizer::Recognizer(const VmConfig& vm_cfg, const LmConfig& lm_cfg, uint64_t seed) {
  if (vm_cfg.dim != lm_cfg.dim)
    throw ConfigError("recognizer: vision dim " + std::to_string(vm_cfg.dim) +
                      " must equal language dim " + std::to_string(lm_cfg.dim));
  if (vm_cfg.max_len != lm_cfg.max_len)
    throw ConfigError("recognizer: vision and language max_len differ");
  Rng rng(seed);
  vm_ = VisionModel(vm_cfg, rng);
  refiner_ = Refiner(lm_cfg, rng);
}

Recognizer::Prediction Recognizer::predict(const Tensor<float>& image, int iterations) const {
  Prediction p;
  p.vision = vm_.predict(image);
  p.refined = refiner_.refine(p.vision, iterations);
  p.text = decode_string(p.refined.final_probs, vm_.config().alphabet);
  return p;
}

ParamList<float> Recognizer::params() {
  ParamList<float> list;
  vm_.params(list);
  refiner_.params(list);
  return list;
}

void Recognizer::save(const std::string& path) { save_checkpoint(path, params()); }
void Recognizer::load(const std::string& path) { load_checkpoint(path, params()); }

// ---------------------------------------------------------------------------
// PlateDetector
// ---------------------------------------------------------------------------

PlateDetector::PlateDetector(const DetectorConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  net_ = DetectorNet(cfg, rng);
}

std::vector<Detection> PlateDetector::detect(const Image& scene) const {
  const DetectorConfig& cfg = net_.config();
  Image resized = scene;
  if (scene.h != cfg.input || scene.w != cfg.input)
    resized = resize_bilinear(scene, cfg.input, cfg.input);
  if (resized.c != cfg.in_channels)
    throw ShapeError("detector: scene has " + std::to_string(resized.c) + " channels, expected " +
                     std::to_string(cfg.in_channels));
  const Tensor<float> grid = net_.predict_grid(image_to_tensor(resized));
  return nms(decode_predictions(grid, cfg.conf_thresh, cfg), cfg.nms_iou);
}

ParamList<float> PlateDetector::params() {
  ParamList<float> list;
  net_.params(list);
  return list;
}

void PlateDetector::save(const std::string& path) { save_checkpoint(path, params()); }
void PlateDetector::load(const std::string& path) { load_checkpoint(path, params()); }

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

Image crop_box(const Image& img, const BBox& box, double margin) {
  const double bw = box.w * img.w, bh = box.h * img.h;
  const double mx = margin * bw, my = margin * bh;
  const int x0 = static_cast<int>(std::floor(box.x * img.w - bw / 2 - mx));
  const int y0 = static_cast<int>(std::floor(box.y * img.h - bh / 2 - my));
  const int cw = static_cast<int>(std::ceil(bw + 2 * mx));
  const int ch = static_cast<int>(std::ceil(bh + 2 * my));
  return crop(img, x0, y0, cw, ch);
}

Tensor<float> record_crop(const Image& img, const BBox& box, double margin, const VmConfig& vm) {
  Image c = crop_box(img, box, margin);
  if (c.h != vm.input_h || c.w != vm.input_w) c = resize_bilinear(c, vm.input_h, vm.input_w);
  return image_to_tensor(c);
}

ScenePrediction Pipeline::run(const Image& scene) const {
  ScenePrediction out;
  const auto t0 = std::chrono::steady_clock::now();
  out.detections = det_.detect(scene);
  out.detect_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  for (const Detection& d : out.detections) {
    const Tensor<float> crop_t = record_crop(scene, d.box, margin_, rec_.vm_config());
    out.strings.push_back(rec_.predict(crop_t, iterations_).text);
  }
  out.recognize_ms = ms_since(t1);
  return out;
}

// ---------------------------------------------------------------------------
// cmd_gen_data
// ---------------------------------------------------------------------------

GenResult cmd_gen_data(const RunConfig& cfg, std::ostream& log) {
  GenConfig gen;
  gen.n = cfg.gen_n;
  gen.grammar = resolve_grammar(cfg.gen_grammar);
  gen.aug = cfg.aug;
  gen.scene = cfg.scene;
  gen.frac_train = cfg.gen_fractions[0];
  gen.frac_val = cfg.gen_fractions[1];
  gen.frac_test = cfg.gen_fractions[2];
  gen.night_fraction = cfg.gen_night_fraction;
  gen.plate_h = cfg.plate_h;
  gen.plate_w = cfg.plate_w;
  gen.out_dir = cfg.out_dir;
  gen.seed = cfg.seed;
  gen.threads = cfg.threads;

  const GenResult result = generate_dataset(gen);
  log << "generated " << gen.n << " records under " << gen.out_dir << "\n"
      << "  train/val/test: " << result.n_train << "/" << result.n_val << "/" << result.n_test
      << "\n"
      << "  night-tagged:   " << result.night_count << "\n"
      << "  scenes manifest: " << result.scenes_manifest << "\n"
      << "  crops manifest:  " << result.crops_manifest << "\n";
  return result;
}

// ---------------------------------------------------------------------------
// cmd_eval
// ---------------------------------------------------------------------------

EvalReport recognizer_eval(const Recognizer& rec, const Manifest& manifest,
                           const std::string& split, int iterations, double margin,
                           const std::string& tag_filter, int threads) {
  struct Item {
    const ManifestRecord* rec;
    size_t box_ix;
  };
  std::vector<Item> items;
  for (const ManifestRecord* r : manifest.split_records(split)) {
    if (!tag_filter.empty() && !r->has_tag(tag_filter)) continue;
    for (size_t b = 0; b < r->boxes.size(); ++b) items.push_back({r, b});
  }

  std::vector<std::string> predicted(items.size());
  std::vector<std::string> truth(items.size());
  std::vector<double> times(items.size(), 0.0);
  std::vector<std::string> errors;
  std::mutex err_mutex;

  parallel_for(static_cast<int64_t>(items.size()), threads, [&](int64_t i) {
    const Item& item = items[static_cast<size_t>(i)];
    truth[static_cast<size_t>(i)] = item.rec->strings[item.box_ix];
    try {
      const Image img = read_pnm(manifest.image_path(*item.rec));
      const Tensor<float> crop_t =
          record_crop(img, item.rec->boxes[item.box_ix], margin, rec.vm_config());
      const auto t0 = std::chrono::steady_clock::now();
      predicted[static_cast<size_t>(i)] = rec.predict(crop_t, iterations).text;
      times[static_cast<size_t>(i)] = ms_since(t0);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      errors.push_back(item.rec->image + ": " + e.what());
      predicted[static_cast<size_t>(i)] = "\x01unreadable";
    }
  });

  EvalReport report;
  report.records = static_cast<int>(items.size());
  report.plates = static_cast<int>(items.size());
  report.plate_acc = items.empty() ? Rate(std::nullopt) : plate_accuracy(predicted, truth);
  report.record_errors = errors;
  if (!times.empty()) {
    double total = 0;
    for (double t : times) total += t;
    report.timings.images = static_cast<int>(times.size());
    report.timings.recognize_ms_mean = total / static_cast<double>(times.size());
    report.timings.total_ms_mean = report.timings.recognize_ms_mean;
  }

  // per-tag sub-reports (plate accuracy only; detection metrics do not apply)
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> by_tag;
  for (size_t i = 0; i < items.size(); ++i)
    for (const std::string& tag : items[i].rec->tags) {
      by_tag[tag].first.push_back(predicted[i]);
      by_tag[tag].second.push_back(truth[i]);
    }
  for (auto& [tag, lists] : by_tag) {
    EvalReport sub;
    sub.records = static_cast<int>(lists.first.size());
    sub.plates = sub.records;
    sub.plate_acc = plate_accuracy(lists.first, lists.second);
    report.per_tag[tag] = std::move(sub);
  }
  return report;
}

EvalOutputs cmd_eval(const RunConfig& cfg, const std::string& tag_filter,
                     std::optional<int> iterations_override, std::ostream& log) {
  require_file(cfg.manifest, "manifest");
  require_file(cfg.rec_checkpoint, "recognizer checkpoint");
  const int iterations = iterations_override.value_or(cfg.lm.iterations);

  Recognizer rec(cfg.vm, cfg.lm, cfg.seed);
  rec.load(cfg.rec_checkpoint);
  const Manifest manifest = read_manifest(cfg.manifest);

  fs::create_directories(cfg.out_dir);
  EvalOutputs outputs;

  outputs.recognizer = recognizer_eval(rec, manifest, cfg.eval_split, iterations, cfg.infer_margin,
                                       tag_filter, cfg.threads);
  outputs.recognizer.recognizer_params = rec.param_count();
  outputs.recognizer.recognizer_gflops = static_cast<double>(rec.flops_per_image(iterations)) / 1e9;

  if (!cfg.det_checkpoint.empty()) {
    require_file(cfg.det_checkpoint, "detector checkpoint");
    PlateDetector det(cfg.det, cfg.seed + 1);
    det.load(cfg.det_checkpoint);
    Pipeline pipeline(std::move(det), std::move(rec), cfg.infer_margin, iterations);
    const PipelineFn fn = [&pipeline](const Image& img) { return pipeline.run(img); };
    outputs.end_to_end = end_to_end_eval(fn, manifest, cfg.eval_split, cfg.eval_iou, tag_filter);
    outputs.end_to_end.detector_params = pipeline.detector().net().param_count();
    outputs.end_to_end.detector_gflops =
        static_cast<double>(pipeline.detector().net().flops_per_image()) / 1e9;
    outputs.end_to_end.recognizer_params = pipeline.recognizer().param_count();
    outputs.end_to_end.recognizer_gflops =
        static_cast<double>(pipeline.recognizer().flops_per_image(iterations)) / 1e9;
    outputs.has_end_to_end = true;
  }

  auto write_pair = [&](const EvalReport& report, const std::string& stem) {
    const std::string json_path = (fs::path(cfg.out_dir) / (stem + ".json")).string();
    const std::string table_path = (fs::path(cfg.out_dir) / (stem + ".txt")).string();
    std::ofstream(json_path) << report_to_json(report);
    std::ofstream(table_path) << report_to_table(report);
    outputs.written_files.push_back(json_path);
    outputs.written_files.push_back(table_path);
  };
  write_pair(outputs.recognizer, "eval_recognizer");
  log << "recognizer-only (" << cfg.eval_split << ", iterations=" << iterations << ")\n"
      << report_to_table(outputs.recognizer);
  if (outputs.has_end_to_end) {
    write_pair(outputs.end_to_end, "eval_end_to_end");
    log << "\nend-to-end (" << cfg.eval_split << ")\n" << report_to_table(outputs.end_to_end);
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// cmd_infer
// ---------------------------------------------------------------------------

std::vector<InferImageResult> cmd_infer(const RunConfig& cfg,
                                        const std::vector<std::string>& images,
                                        std::optional<int> iterations_override, std::ostream& log) {
  require_file(cfg.det_checkpoint, "detector checkpoint");
  require_file(cfg.rec_checkpoint, "recognizer checkpoint");
  const int iterations = iterations_override.value_or(cfg.lm.iterations);

  PlateDetector det(cfg.det, cfg.seed + 1);
  det.load(cfg.det_checkpoint);
  Recognizer rec(cfg.vm, cfg.lm, cfg.seed);
  rec.load(cfg.rec_checkpoint);
  Pipeline pipeline(std::move(det), std::move(rec), cfg.infer_margin, iterations);

  std::vector<InferImageResult> results;
  for (const std::string& path : images) {
    const auto t0 = std::chrono::steady_clock::now();
    const Image img = read_pnm(path);  // unreadable image -> IoError propagates
    ScenePrediction pred = pipeline.run(img);
    InferImageResult r;
    r.image = path;
    r.detections = std::move(pred.detections);
    r.strings = std::move(pred.strings);
    r.detect_ms = pred.detect_ms;
    r.recognize_ms = pred.recognize_ms;
    r.total_ms = ms_since(t0);
    log << path << ": " << r.detections.size() << " plate(s)";
    for (size_t i = 0; i < r.strings.size(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), " [%s conf=%.3f x=%.3f y=%.3f w=%.3f h=%.3f]",
                    r.strings[i].c_str(), r.detections[i].confidence, r.detections[i].box.x,
                    r.detections[i].box.y, r.detections[i].box.w, r.detections[i].box.h);
      log << buf;
    }
    char tbuf[96];
    std::snprintf(tbuf, sizeof(tbuf), "  (detect %.2fms, recognize %.2fms, total %.2fms)\n",
                  r.detect_ms, r.recognize_ms, r.total_ms);
    log << tbuf;
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------
// cmd_bench
// ---------------------------------------------------------------------------

EvalReport cmd_bench(const RunConfig& cfg, std::ostream& log) {
  require_file(cfg.manifest, "manifest");
  require_file(cfg.det_checkpoint, "detector checkpoint");
  require_file(cfg.rec_checkpoint, "recognizer checkpoint");

  PlateDetector det(cfg.det, cfg.seed + 1);
  det.load(cfg.det_checkpoint);
  Recognizer rec(cfg.vm, cfg.lm, cfg.seed);
  rec.load(cfg.rec_checkpoint);
  Pipeline pipeline(std::move(det), std::move(rec), cfg.infer_margin, cfg.lm.iterations);

  const Manifest manifest = read_manifest(cfg.manifest);
  std::vector<Image> images;
  for (const ManifestRecord* r : manifest.split_records(cfg.eval_split)) {
    images.push_back(read_pnm(manifest.image_path(*r)));
    if (images.size() >= 32) break;
  }
  if (images.empty()) throw ConfigError("bench: no images in split '" + cfg.eval_split + "'");

  const int runs = std::max(cfg.bench_runs, 100);
  for (int warm = 0; warm < 5; ++warm) pipeline.run(images[static_cast<size_t>(warm) % images.size()]);

  std::vector<double> detect_ms, recognize_ms, total_ms;
  for (int i = 0; i < runs; ++i) {
    const ScenePrediction pred = pipeline.run(images[static_cast<size_t>(i) % images.size()]);
    detect_ms.push_back(pred.detect_ms);
    recognize_ms.push_back(pred.recognize_ms);
    total_ms.push_back(pred.detect_ms + pred.recognize_ms);
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto p95 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[std::min(v.size() - 1,
                      static_cast<size_t>(std::ceil(0.95 * static_cast<double>(v.size()))) - 1)];
  };

  EvalReport report;
  report.records = runs;
  report.timings.images = runs;
  report.timings.detect_ms_mean = mean(detect_ms);
  report.timings.detect_ms_p95 = p95(detect_ms);
  report.timings.recognize_ms_mean = mean(recognize_ms);
  report.timings.recognize_ms_p95 = p95(recognize_ms);
  report.timings.total_ms_mean = mean(total_ms);
  report.timings.total_ms_p95 = p95(total_ms);
  report.detector_params = pipeline.detector().net().param_count();
  report.detector_gflops = static_cast<double>(pipeline.detector().net().flops_per_image()) / 1e9;
  report.recognizer_params = pipeline.recognizer().param_count();
  report.recognizer_gflops =
      static_cast<double>(pipeline.recognizer().flops_per_image(pipeline.iterations())) / 1e9;

  fs::create_directories(cfg.out_dir);
  const std::string json_path = (fs::path(cfg.out_dir) / "bench.json").string();
  const std::string table_path = (fs::path(cfg.out_dir) / "bench.txt").string();
  std::ofstream(json_path) << report_to_json(report);
  std::ofstream(table_path) << report_to_table(report);
  log << report_to_table(report);
  return report;
}

}  // namespace platekit
