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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "platekit/checkpoint.hpp"
#include "platekit/config.hpp"
#include "platekit/metrics.hpp"

namespace platekit {

/// Vision model + language refiner behind one weight container
/// (prefixes vm/, lm/, fusion/).
class Recognizer {
 public:
  Recognizer() = default;
  Recognizer(const VmConfig& vm_cfg, const LmConfig& lm_cfg, uint64_t seed);

  struct Prediction {
    std::string text;
    VisionOutput vision;
    Refiner::Result refined;
  };
  Prediction predict(const Tensor<float>& image, int iterations) const;

  VisionModel& vision() { return vm_; }
  const VisionModel& vision() const { return vm_; }
  Refiner& refiner() { return refiner_; }
  const Refiner& refiner() const { return refiner_; }
  const VmConfig& vm_config() const { return vm_.config(); }
  const LmConfig& lm_config() const { return refiner_.config(); }

  ParamList<float> params();
  void save(const std::string& path);
  void load(const std::string& path);
  int64_t param_count() const { return vm_.param_count() + refiner_.param_count(); }
  int64_t flops_per_image(int iterations) const {
    return vm_.flops_per_image() + static_cast<int64_t>(iterations) * refiner_.flops_per_iteration();
  }

 private:
  VisionModel vm_;
  Refiner refiner_;
};

/// Grid detector behind its checkpoint (prefix det/).
class PlateDetector {
 public:
  PlateDetector() = default;
  PlateDetector(const DetectorConfig& cfg, uint64_t seed);

  /// Resize -> grid -> threshold -> NMS; detections in scene coordinates.
  std::vector<Detection> detect(const Image& scene) const;

  DetectorNet& net() { return net_; }
  const DetectorNet& net() const { return net_; }
  const DetectorConfig& config() const { return net_.config(); }
  ParamList<float> params();
  void save(const std::string& path);
  void load(const std::string& path);

 private:
  DetectorNet net_;
};

/// Crop rect for a detection: the box expanded by `margin` (fraction of its
/// extents) on every side, clamped to the image.
Image crop_box(const Image& img, const BBox& box, double margin);

/// Detect -> crop with margin -> stretch-resize -> recognize.
class Pipeline {
 public:
  Pipeline(PlateDetector detector, Recognizer recognizer, double crop_margin, int iterations)
      : det_(std::move(detector)), rec_(std::move(recognizer)), margin_(crop_margin),
        iterations_(iterations) {}

  ScenePrediction run(const Image& scene) const;

  const PlateDetector& detector() const { return det_; }
  const Recognizer& recognizer() const { return rec_; }
  int iterations() const { return iterations_; }

 private:
  PlateDetector det_;
  Recognizer rec_;
  double margin_;
  int iterations_;
};

// ---------------------------------------------------------------------------
// Command entry points (the CLI is a thin argv wrapper around these)
// ---------------------------------------------------------------------------

struct TrainResult {
  double final_val_metric = 0;
  int epochs_run = 0;
  bool early_stopped = false;
  std::string checkpoint;
  std::string log_file;
};

GenResult cmd_gen_data(const RunConfig& cfg, std::ostream& log);
TrainResult cmd_train_detector(const RunConfig& cfg, std::ostream& log);
TrainResult cmd_train_recognizer(const RunConfig& cfg, std::ostream& log);

struct EvalOutputs {
  EvalReport end_to_end;   // present when a detector checkpoint is configured
  EvalReport recognizer;   // recognizer-only on truth crops
  bool has_end_to_end = false;
  std::vector<std::string> written_files;
};
EvalOutputs cmd_eval(const RunConfig& cfg, const std::string& tag_filter,
                     std::optional<int> iterations_override, std::ostream& log);

struct InferImageResult {
  std::string image;
  std::vector<Detection> detections;
  std::vector<std::string> strings;  // parallel to detections
  double detect_ms = 0, recognize_ms = 0, total_ms = 0;
};
std::vector<InferImageResult> cmd_infer(const RunConfig& cfg,
                                        const std::vector<std::string>& images,
                                        std::optional<int> iterations_override, std::ostream& log);

EvalReport cmd_bench(const RunConfig& cfg, std::ostream& log);

/// Shared helpers (also used by tests)

/// Plate crop for one manifest record box: truth crop + margin, stretched to
/// the recognizer input.
Tensor<float> record_crop(const Image& img, const BBox& box, double margin, const VmConfig& vm);

/// Recognizer-only evaluation over truth crops of a manifest split.
EvalReport recognizer_eval(const Recognizer& rec, const Manifest& manifest,
                           const std::string& split, int iterations, double margin,
                           const std::string& tag_filter, int threads);

/// mAP@iou over a manifest split; decode_thresh keeps the PR sweep dense
/// (it should sit well below the deployment confidence threshold).
Rate detector_eval_map(const PlateDetector& det, const Manifest& manifest,
                       const std::string& split, double iou_thresh, double decode_thresh,
                       int threads);

}  // namespace platekit
