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

#include <vector>

#include "platekit/nn.hpp"
#include "platekit/tensor.hpp"

namespace platekit {

/// Axis-aligned box, center coordinates and extents normalized to [0,1] of
/// the image size.
struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool valid() const {
    return x >= 0 && x <= 1 && y >= 0 && y <= 1 && w > 0 && w <= 1 && h > 0 && h <= 1;
  }
};

struct Detection {
  BBox box;
  double confidence = 0;
};

struct DetectorConfig {
  int grid = 7;            // S
  int boxes_per_cell = 2;  // B
  double conf_thresh = 0.25;
  double nms_iou = 0.45;
  int input = 112;  // square input resolution
  int in_channels = 3;
  std::vector<int> widths{12, 24, 48, 64};  // one stride-2 stage per width
  double lambda_coord = 5.0;
  double noobj_weight = 0.5;

  void validate() const;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

/// Grid target tensor [S,S,B*5], slot layout (x_off, y_off, w, h, objectness).
/// The cell containing a truth center gets offsets-within-cell, extents and
/// objectness 1 in its first free slot; extra truths beyond B per cell are
/// dropped and counted. Truths landing in one cell are assigned in
/// descending-area order.
Tensor<float> encode_targets(const std::vector<BBox>& truths, const DetectorConfig& cfg,
                             int* dropped = nullptr);

/// Detections from a squashed prediction grid, confidence >= conf_thresh,
/// sorted by confidence descending with ties in row-major cell order.
std::vector<Detection> decode_predictions(const Tensor<float>& grid, double conf_thresh,
                                          const DetectorConfig& cfg);

/// Greedy NMS: keep the highest-confidence detection, suppress others with
/// IoU strictly above the threshold (ties at the threshold survive).
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh);

/// Forward pieces of the detector head; values are already squashed
/// (offsets/objectness through the logistic, extents through exp).
struct DetectorForward {
  Var<float> offsets;  // [S,S,B*2]
  Var<float> extents;  // [S,S,B*2]
  Var<float> object;   // [S,S,B]
};

/// Single-stage grid detector: stride-2 conv stages down to an SxS map with
/// three 1x1 heads.
class DetectorNet {
 public:
  DetectorNet() = default;
  DetectorNet(const DetectorConfig& cfg, Rng& rng);

  DetectorForward forward(Graph<float>& g, Var<float> image) const;

  /// Packed [S,S,B*5] squashed grid for decode_predictions.
  Tensor<float> predict_grid(const Tensor<float>& image) const;

  void params(ParamList<float>& out);  // registered under "det/"
  int64_t param_count() const;
  int64_t flops_per_image() const;
  const DetectorConfig& config() const { return cfg_; }

 private:
  DetectorConfig cfg_;
  std::vector<Conv2dLayer<float>> trunk_;
  Conv2dLayer<float> mix_;
  Conv2dLayer<float> head_off_;
  Conv2dLayer<float> head_ext_;
  Conv2dLayer<float> head_obj_;
};

/// Squared-error detection loss: coordinates on responsible slots (weighted
/// lambda_coord), objectness everywhere with noobj_weight on empty slots.
/// The objectness target of a responsible slot is the IoU between the
/// decoded predicted box and its truth, recomputed (detached) from the
/// current forward; pass obj_target_override [S,S,B] to freeze it instead
/// (finite-difference tests need a fixed target).
Var<float> detection_loss(Graph<float>& g, const DetectorForward& fwd,
                          const Tensor<float>& target, const DetectorConfig& cfg,
                          const Tensor<float>* obj_target_override = nullptr);

/// Packs squashed head outputs into the public [S,S,B*5] grid layout.
Tensor<float> pack_grid(const Tensor<float>& offsets, const Tensor<float>& extents,
                        const Tensor<float>& object, const DetectorConfig& cfg);

}  // namespace platekit
