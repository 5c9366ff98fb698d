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

#include "platekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "platekit/errors.hpp"

namespace platekit {

MatchResult match_detections(std::vector<Detection> dets, const std::vector<BBox>& truths,
                             double iou_thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  MatchResult result;
  result.det_to_truth.assign(dets.size(), -1);
  std::vector<bool> taken(truths.size(), false);
  for (size_t d = 0; d < dets.size(); ++d) {
    double best = 0;
    int best_t = -1;
    for (size_t t = 0; t < truths.size(); ++t) {
      if (taken[t]) continue;
      const double overlap = iou(dets[d].box, truths[t]);
      if (overlap >= iou_thresh && overlap > best) {
        best = overlap;
        best_t = static_cast<int>(t);
      }
    }
    if (best_t >= 0) {
      taken[static_cast<size_t>(best_t)] = true;
      result.det_to_truth[d] = best_t;
      ++result.counts.tp;
    } else {
      ++result.counts.fp;
    }
  }
  for (bool t : taken)
    if (!t) ++result.counts.fn;
  return result;
}

Rate precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

Rate recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

Rate f1(Rate p, Rate r) {
  if (!p.has_value() || !r.has_value()) return std::nullopt;
  if (*p == 0.0 && *r == 0.0) return 0.0;  // documented convention
  return 2.0 * (*p) * (*r) / (*p + *r);
}

Rate average_precision(const std::vector<std::vector<Detection>>& dets_per_image,
                       const std::vector<std::vector<BBox>>& truths_per_image, double iou_thresh) {
  if (dets_per_image.size() != truths_per_image.size())
    throw ValueError("average_precision: image count mismatch");
  int64_t total_truths = 0;
  for (const auto& t : truths_per_image) total_truths += static_cast<int64_t>(t.size());
  if (total_truths == 0) return std::nullopt;

  struct Ranked {
    int image;
    const Detection* det;
  };
  std::vector<Ranked> ranked;
  for (size_t i = 0; i < dets_per_image.size(); ++i)
    for (const Detection& d : dets_per_image[i]) ranked.push_back({static_cast<int>(i), &d});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.det->confidence > b.det->confidence;
  });

  std::vector<std::vector<bool>> taken(truths_per_image.size());
  for (size_t i = 0; i < taken.size(); ++i) taken[i].assign(truths_per_image[i].size(), false);

  const size_t n = ranked.size();
  std::vector<double> prec(n), rec(n);
  std::vector<bool> is_tp(n, false);
  int64_t tp = 0, fp = 0;
  for (size_t k = 0; k < n; ++k) {
    const auto& truths = truths_per_image[static_cast<size_t>(ranked[k].image)];
    auto& used = taken[static_cast<size_t>(ranked[k].image)];
    double best = 0;
    int best_t = -1;
    for (size_t t = 0; t < truths.size(); ++t) {
      if (used[t]) continue;
      const double overlap = iou(ranked[k].det->box, truths[t]);
      if (overlap >= iou_thresh && overlap > best) {
        best = overlap;
        best_t = static_cast<int>(t);
      }
    }
    if (best_t >= 0) {
      used[static_cast<size_t>(best_t)] = true;
      ++tp;
      is_tp[k] = true;
    } else {
      ++fp;
    }
    prec[k] = static_cast<double>(tp) / static_cast<double>(tp + fp);
    rec[k] = static_cast<double>(tp) / static_cast<double>(total_truths);
  }

  // all-points interpolation: integrate recall deltas against the running
  // maximum of precision to the right
  double ap = 0, envelope = 0, prev_recall = 0;
  std::vector<double> env(n);
  for (size_t k = n; k-- > 0;) {
    envelope = std::max(envelope, prec[k]);
    env[k] = envelope;
  }
  for (size_t k = 0; k < n; ++k) {
    if (!is_tp[k]) continue;
    ap += (rec[k] - prev_recall) * env[k];
    prev_recall = rec[k];
  }
  return ap;
}

Rate plate_accuracy(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size()) throw ValueError("plate_accuracy: list size mismatch");
  if (truth.empty()) return std::nullopt;
  int64_t ok = 0;
  for (size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------
// End-to-end evaluation
// ---------------------------------------------------------------------------

namespace {

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const size_t ix = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
  return v[std::min(ix, v.size() - 1)];
}

struct Accumulator {
  ConfusionCounts counts;
  int64_t plates = 0, plates_ok = 0;
  int64_t scenes = 0, scenes_det_ok = 0, scenes_e2e_ok = 0;
  std::vector<std::vector<Detection>> dets_pi;
  std::vector<std::vector<BBox>> truths_pi;
  std::vector<double> detect_ms, recognize_ms, total_ms;

  void add(const ManifestRecord& rec, const ScenePrediction& pred, const MatchResult& match) {
    counts.tp += match.counts.tp;
    counts.fp += match.counts.fp;
    counts.fn += match.counts.fn;
    // per-truth success: some detection matched it and read it exactly
    std::vector<bool> truth_ok(rec.boxes.size(), false);
    for (size_t d = 0; d < match.det_to_truth.size(); ++d) {
      const int t = match.det_to_truth[d];
      if (t < 0) continue;
      if (d < pred.strings.size() && pred.strings[d] == rec.strings[static_cast<size_t>(t)])
        truth_ok[static_cast<size_t>(t)] = true;
    }
    bool all_read = true;
    for (bool ok : truth_ok) {
      ++plates;
      if (ok) ++plates_ok; else all_read = false;
    }
    const bool det_ok = match.counts.fn == 0;
    ++scenes;
    if (det_ok) ++scenes_det_ok;
    if (det_ok && all_read) ++scenes_e2e_ok;
    dets_pi.push_back(pred.detections);
    truths_pi.push_back(rec.boxes);
    detect_ms.push_back(pred.detect_ms);
    recognize_ms.push_back(pred.recognize_ms);
    total_ms.push_back(pred.detect_ms + pred.recognize_ms);
  }

  EvalReport report(double iou_thresh) const {
    EvalReport r;
    r.records = static_cast<int>(scenes);
    r.plates = static_cast<int>(plates);
    r.precision_ = precision(counts);
    r.recall_ = recall(counts);
    r.f1_ = f1(r.precision_, r.recall_);
    r.map50 = scenes > 0 ? average_precision(dets_pi, truths_pi, iou_thresh) : std::nullopt;
    r.plate_acc = plates > 0 ? Rate(static_cast<double>(plates_ok) / static_cast<double>(plates))
                             : std::nullopt;
    r.detection_success =
        scenes > 0 ? Rate(static_cast<double>(scenes_det_ok) / static_cast<double>(scenes))
                   : std::nullopt;
    r.end_to_end = scenes > 0
                       ? Rate(static_cast<double>(scenes_e2e_ok) / static_cast<double>(scenes))
                       : std::nullopt;
    if (!detect_ms.empty()) {
      r.timings.images = static_cast<int>(detect_ms.size());
      r.timings.detect_ms_mean =
          std::accumulate(detect_ms.begin(), detect_ms.end(), 0.0) / detect_ms.size();
      r.timings.recognize_ms_mean =
          std::accumulate(recognize_ms.begin(), recognize_ms.end(), 0.0) / recognize_ms.size();
      r.timings.total_ms_mean =
          std::accumulate(total_ms.begin(), total_ms.end(), 0.0) / total_ms.size();
      r.timings.detect_ms_p95 = percentile95(detect_ms);
      r.timings.recognize_ms_p95 = percentile95(recognize_ms);
      r.timings.total_ms_p95 = percentile95(total_ms);
    }
    return r;
  }
};

}  // namespace

EvalReport end_to_end_eval(const PipelineFn& pipeline, const Manifest& manifest,
                           const std::string& split, double iou_thresh,
                           const std::string& tag_filter) {
  Accumulator global;
  std::map<std::string, Accumulator> by_tag;
  std::vector<std::string> errors;

  for (const ManifestRecord* rec : manifest.split_records(split)) {
    if (!tag_filter.empty() && !rec->has_tag(tag_filter)) continue;
    Image img;
    try {
      img = read_pnm(manifest.image_path(*rec));
    } catch (const Error& e) {
      errors.push_back(rec->image + ": " + e.what());
      continue;
    }
    const ScenePrediction pred = pipeline(img);
    const MatchResult match = match_detections(pred.detections, rec->boxes, iou_thresh);
    global.add(*rec, pred, match);
    for (const std::string& tag : rec->tags) by_tag[tag].add(*rec, pred, match);
  }

  EvalReport report = global.report(iou_thresh);
  for (const auto& [tag, acc] : by_tag) report.per_tag[tag] = acc.report(iou_thresh);
  report.record_errors = std::move(errors);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json rate_json(const Rate& r) {
  if (!r.has_value()) return nullptr;
  return *r;
}

nlohmann::json report_json_inner(const EvalReport& r) {
  nlohmann::json j;
  j["records"] = r.records;
  j["plates"] = r.plates;
  j["precision"] = rate_json(r.precision_);
  j["recall"] = rate_json(r.recall_);
  j["f1"] = rate_json(r.f1_);
  j["map50"] = rate_json(r.map50);
  j["plate_accuracy"] = rate_json(r.plate_acc);
  j["detection_success"] = rate_json(r.detection_success);
  j["end_to_end_accuracy"] = rate_json(r.end_to_end);
  j["timings_ms"] = {
      {"detect_mean", r.timings.detect_ms_mean},       {"detect_p95", r.timings.detect_ms_p95},
      {"recognize_mean", r.timings.recognize_ms_mean}, {"recognize_p95", r.timings.recognize_ms_p95},
      {"total_mean", r.timings.total_ms_mean},         {"total_p95", r.timings.total_ms_p95},
      {"images", r.timings.images}};
  j["model"] = {{"detector_params", r.detector_params},
                {"recognizer_params", r.recognizer_params},
                {"detector_gflops", r.detector_gflops},
                {"recognizer_gflops", r.recognizer_gflops}};
  if (!r.record_errors.empty()) j["record_errors"] = r.record_errors;
  for (const auto& [tag, sub] : r.per_tag) j["per_tag"][tag] = report_json_inner(sub);
  return j;
}

std::string fmt_rate(const Rate& r) {
  if (!r.has_value()) return "undef";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *r);
  return buf;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  return report_json_inner(report).dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream os;
  char line[160];
  os << "metric                value\n";
  os << "--------------------  --------\n";
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "precision", fmt_rate(report.precision_).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "recall", fmt_rate(report.recall_).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "f1", fmt_rate(report.f1_).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "mAP@0.5", fmt_rate(report.map50).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "plate accuracy", fmt_rate(report.plate_acc).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "detection success",
                fmt_rate(report.detection_success).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %s\n", "end-to-end accuracy",
                fmt_rate(report.end_to_end).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-20s  %d scenes / %d plates\n", "evaluated", report.records,
                report.plates);
  os << line;

  os << "\ncomponent     ms/image (mean)  ms/image (p95)  GFLOPs    parameters\n";
  os << "-----------   ---------------  --------------  --------  ----------\n";
  std::snprintf(line, sizeof(line), "%-13s %15.3f  %14.3f  %8.3f  %10lld\n", "detection",
                report.timings.detect_ms_mean, report.timings.detect_ms_p95, report.detector_gflops,
                static_cast<long long>(report.detector_params));
  os << line;
  std::snprintf(line, sizeof(line), "%-13s %15.3f  %14.3f  %8.3f  %10lld\n", "recognition",
                report.timings.recognize_ms_mean, report.timings.recognize_ms_p95,
                report.recognizer_gflops, static_cast<long long>(report.recognizer_params));
  os << line;
  std::snprintf(line, sizeof(line), "%-13s %15.3f  %14.3f  %8.3f  %10lld\n", "total",
                report.timings.total_ms_mean, report.timings.total_ms_p95,
                report.detector_gflops + report.recognizer_gflops,
                static_cast<long long>(report.detector_params + report.recognizer_params));
  os << line;

  if (!report.per_tag.empty()) {
    os << "\nper-tag sub-reports\n";
    for (const auto& [tag, sub] : report.per_tag) {
      std::snprintf(line, sizeof(line),
                    "  %-12s records=%-6d plate_acc=%-8s end_to_end=%-8s mAP@0.5=%s\n", tag.c_str(),
                    sub.records, fmt_rate(sub.plate_acc).c_str(), fmt_rate(sub.end_to_end).c_str(),
                    fmt_rate(sub.map50).c_str());
      os << line;
    }
  }
  if (!report.record_errors.empty())
    os << "\n" << report.record_errors.size() << " record error(s); see JSON report\n";
  return os.str();
}

}  // namespace platekit
