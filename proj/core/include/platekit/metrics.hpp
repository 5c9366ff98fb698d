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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "platekit/image.hpp"
#include "platekit/manifest.hpp"

namespace platekit {

/// Rates with an empty denominator surface as std::nullopt (the
/// undefined-sentinel), never silently as 0 or 1.
using Rate = std::optional<double>;

struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0;
};

struct MatchResult {
  ConfusionCounts counts;
  std::vector<int> det_to_truth;  // per detection: matched truth index or -1
};

/// Greedy confidence-order matching: a detection is a TP when its best
/// unmatched truth reaches the IoU threshold; each truth matches at most once.
MatchResult match_detections(std::vector<Detection> dets, const std::vector<BBox>& truths,
                             double iou_thresh);

Rate precision(const ConfusionCounts& c);
Rate recall(const ConfusionCounts& c);

/// Harmonic mean; undefined inputs propagate, p == r == 0 yields 0.
Rate f1(Rate p, Rate r);

/// Single-class AP over the pooled confidence ranking with all-points
/// interpolation. Zero truths -> nullopt; no detections over >=1 truth -> 0.
Rate average_precision(const std::vector<std::vector<Detection>>& dets_per_image,
                       const std::vector<std::vector<BBox>>& truths_per_image, double iou_thresh);

/// Exact full-string match rate over parallel lists.
Rate plate_accuracy(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& truth);

struct StageTimings {
  double detect_ms_mean = 0, detect_ms_p95 = 0;
  double recognize_ms_mean = 0, recognize_ms_p95 = 0;
  double total_ms_mean = 0, total_ms_p95 = 0;
  int images = 0;
};

struct EvalReport {
  Rate precision_;
  Rate recall_;
  Rate f1_;
  Rate map50;
  Rate plate_acc;           // per-plate: matched detection + exact string
  Rate end_to_end;          // per-scene: every plate detected and read exactly
  Rate detection_success;   // per-scene: every truth matched at the IoU threshold
  int records = 0;
  int plates = 0;
  std::map<std::string, EvalReport> per_tag;  // one sub-report per tag
  StageTimings timings;
  int64_t detector_params = 0, recognizer_params = 0;
  double detector_gflops = 0, recognizer_gflops = 0;
  std::vector<std::string> record_errors;  // evaluation continued past these
};

/// What the pipeline produced for one scene image.
struct ScenePrediction {
  std::vector<Detection> detections;        // post-NMS, confidence order
  std::vector<std::string> strings;         // parallel to detections
  double detect_ms = 0, recognize_ms = 0;
};

using PipelineFn = std::function<ScenePrediction(const Image&)>;

/// Runs the pipeline over every record of `split` (optionally restricted to a
/// tag), matches detections against truth at iou_thresh and aggregates all
/// metrics plus per-tag sub-reports. Unreadable images land in record_errors
/// and evaluation continues.
EvalReport end_to_end_eval(const PipelineFn& pipeline, const Manifest& manifest,
                           const std::string& split, double iou_thresh,
                           const std::string& tag_filter = "");

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace platekit
