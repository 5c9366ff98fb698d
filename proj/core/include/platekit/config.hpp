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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "platekit/detector.hpp"
#include "platekit/language.hpp"
#include "platekit/synth.hpp"
#include "platekit/vision.hpp"

namespace platekit {

/// Flat `key = value` file with '#' comments. Parsing tracks key usage so a
/// config with unknown (misspelled) keys is rejected.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_str(const std::string& key, const std::string& fallback);
  std::string require_str(const std::string& key);
  int64_t get_int(const std::string& key, int64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback);
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback);

  /// Keys never read through a getter; nonempty set -> likely typos.
  std::vector<std::string> unused_keys() const;
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::set<std::string> used_;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

struct TrainConfig {
  int epochs = 10;
  int batch = 32;
  double lr = 1e-3;
  int early_patience = 0;      // 0 disables plateau stopping
  double early_target = 2.0;   // val metric threshold; > 1 disables
  double crop_jitter = 0.0;    // random crop margin/offset during training
  double lm_noise = 0.15;      // P(replace an LM input row with a random one-hot)
  std::string init_from;       // optional warm-start checkpoint
};

/// Everything one run needs; built from a config file plus CLI overrides.
struct RunConfig {
  uint64_t seed = 0;
  int threads = 0;

  std::string manifest;
  std::string out_dir = "runs/out";
  std::string det_checkpoint;
  std::string rec_checkpoint;

  VmConfig vm;
  LmConfig lm;
  DetectorConfig det;
  AugmentationConfig aug;

  // generator settings (gen-data)
  int gen_n = 100;
  std::string gen_grammar = "br-like";
  std::vector<double> gen_fractions{0.7, 0.15, 0.15};
  double gen_night_fraction = 0.0;
  SceneConfig scene;
  int plate_h = 32, plate_w = 96;

  TrainConfig train;

  double eval_iou = 0.5;
  std::string eval_split = "test";
  int bench_runs = 100;
  double infer_margin = 0.05;

  static RunConfig load(const std::string& path);
};

}  // namespace platekit
