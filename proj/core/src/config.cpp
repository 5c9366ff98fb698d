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

#include "platekit/config.hpp"

#include <fstream>
#include <sstream>

namespace platekit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" +
                        line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
    kv.lines_[key] = lineno;
  }
  return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str(), path);
}

void KvFile::fail(const std::string& key, const std::string& what) const {
  auto it = lines_.find(key);
  const std::string where =
      it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
  throw ConfigError(where + ": " + what);
}

std::string KvFile::get_str(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KvFile::require_str(const std::string& key) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty())
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return it->second;
}

int64_t KvFile::get_int(const std::string& key, int64_t fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(key, "'" + key + "' must be an integer, got '" + it->second + "'");
  }
}

double KvFile::get_double(const std::string& key, double fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(key, "'" + key + "' must be a number, got '" + it->second + "'");
  }
}

bool KvFile::get_bool(const std::string& key, bool fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  fail(key, "'" + key + "' must be true/false, got '" + it->second + "'");
}

std::vector<int> KvFile::get_int_list(const std::string& key, const std::vector<int>& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::istringstream ls(it->second);
  std::string tok;
  while (std::getline(ls, tok, ',')) {
    try {
      out.push_back(std::stoi(trim(tok)));
    } catch (...) {
      fail(key, "'" + key + "' must be a comma-separated integer list");
    }
  }
  if (out.empty()) fail(key, "'" + key + "' is empty");
  return out;
}

std::vector<double> KvFile::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream ls(it->second);
  std::string tok;
  while (std::getline(ls, tok, ',')) {
    try {
      out.push_back(std::stod(trim(tok)));
    } catch (...) {
      fail(key, "'" + key + "' must be a comma-separated number list");
    }
  }
  if (out.empty()) fail(key, "'" + key + "' is empty");
  return out;
}

std::vector<std::string> KvFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) out.push_back(key);
  return out;
}

RunConfig RunConfig::load(const std::string& path) {
  KvFile kv = KvFile::parse_file(path);
  RunConfig cfg;

  // seed is mandatory: runs must never pick one up from the wall clock
  cfg.seed = static_cast<uint64_t>(kv.get_int("seed", -1));
  if (!kv.has("seed")) throw ConfigError(path + ": missing required key 'seed'");
  cfg.threads = static_cast<int>(kv.get_int("threads", 0));

  cfg.manifest = kv.get_str("paths.manifest", "");
  cfg.out_dir = kv.get_str("paths.out_dir", "runs/out");
  cfg.det_checkpoint = kv.get_str("paths.det_checkpoint", "");
  cfg.rec_checkpoint = kv.get_str("paths.rec_checkpoint", "");

  const Alphabet alphabet(kv.get_str("alphabet", Alphabet::default_symbols()));

  cfg.vm.input_h = static_cast<int>(kv.get_int("vm.input_h", 32));
  cfg.vm.input_w = static_cast<int>(kv.get_int("vm.input_w", 96));
  cfg.vm.in_channels = static_cast<int>(kv.get_int("vm.channels", 3));
  cfg.vm.widths = kv.get_int_list("vm.widths", {32, 64, 128});
  {
    std::vector<int> default_strides(cfg.vm.widths.size(), 2);
    if (!default_strides.empty()) default_strides.back() = 1;
    cfg.vm.strides = kv.get_int_list("vm.strides", default_strides);
  }
  cfg.vm.dim = static_cast<int>(kv.get_int("vm.dim", cfg.vm.widths.back()));
  cfg.vm.tf_layers = static_cast<int>(kv.get_int("vm.layers", 2));
  cfg.vm.tf_heads = static_cast<int>(kv.get_int("vm.heads", 4));
  cfg.vm.ffn_mult = static_cast<int>(kv.get_int("vm.ffn_mult", 2));
  cfg.vm.max_len = static_cast<int>(kv.get_int("vm.max_len", 12));
  cfg.vm.alphabet = alphabet;

  cfg.lm.layers = static_cast<int>(kv.get_int("lm.layers", 2));
  cfg.lm.heads = static_cast<int>(kv.get_int("lm.heads", 4));
  cfg.lm.dim = cfg.vm.dim;  // fusion requires C == d
  cfg.lm.ffn_mult = static_cast<int>(kv.get_int("lm.ffn_mult", 2));
  cfg.lm.iterations = static_cast<int>(kv.get_int("lm.iterations", 3));
  cfg.lm.max_len = cfg.vm.max_len;
  cfg.lm.alphabet = alphabet;

  cfg.det.grid = static_cast<int>(kv.get_int("det.grid", 7));
  cfg.det.boxes_per_cell = static_cast<int>(kv.get_int("det.boxes", 2));
  cfg.det.conf_thresh = kv.get_double("det.conf_thresh", 0.25);
  cfg.det.nms_iou = kv.get_double("det.nms_iou", 0.45);
  cfg.det.input = static_cast<int>(kv.get_int("det.input", 112));
  cfg.det.in_channels = static_cast<int>(kv.get_int("det.channels", 3));
  cfg.det.widths = kv.get_int_list("det.widths", {12, 24, 48, 64});
  cfg.det.lambda_coord = kv.get_double("det.lambda_coord", 5.0);
  cfg.det.noobj_weight = kv.get_double("det.noobj_weight", 0.5);

  cfg.aug.rot_deg = kv.get_double("aug.rot_deg", 0.0);
  cfg.aug.persp = kv.get_double("aug.persp", 0.0);
  cfg.aug.blur_min = kv.get_double("aug.blur_min", 0.0);
  cfg.aug.blur_max = kv.get_double("aug.blur_max", 0.0);
  cfg.aug.noise = kv.get_double("aug.noise", 0.0);
  cfg.aug.bright_min = kv.get_double("aug.bright_min", 1.0);
  cfg.aug.bright_max = kv.get_double("aug.bright_max", 1.0);
  cfg.aug.night = kv.get_bool("aug.night", false);

  cfg.gen_n = static_cast<int>(kv.get_int("gen.n", 100));
  cfg.gen_grammar = kv.get_str("gen.grammar", "br-like");
  cfg.gen_fractions = kv.get_double_list("gen.fractions", {0.7, 0.15, 0.15});
  cfg.gen_night_fraction = kv.get_double("gen.night_fraction", 0.0);
  cfg.scene.size = static_cast<int>(kv.get_int("gen.scene_size", 192));
  cfg.scene.plate_min = kv.get_double("gen.plate_min", 0.3);
  cfg.scene.plate_max = kv.get_double("gen.plate_max", 0.6);
  cfg.scene.max_distractors = static_cast<int>(kv.get_int("gen.distractors", 3));
  cfg.plate_h = static_cast<int>(kv.get_int("gen.plate_h", cfg.vm.input_h));
  cfg.plate_w = static_cast<int>(kv.get_int("gen.plate_w", cfg.vm.input_w));

  cfg.train.epochs = static_cast<int>(kv.get_int("train.epochs", 10));
  cfg.train.batch = static_cast<int>(kv.get_int("train.batch", 32));
  cfg.train.lr = kv.get_double("train.lr", 1e-3);
  cfg.train.early_patience = static_cast<int>(kv.get_int("train.early_patience", 0));
  cfg.train.early_target = kv.get_double("train.early_target", 2.0);
  cfg.train.crop_jitter = kv.get_double("train.crop_jitter", 0.0);
  cfg.train.lm_noise = kv.get_double("train.lm_noise", 0.15);
  cfg.train.init_from = kv.get_str("train.init_from", "");

  cfg.eval_iou = kv.get_double("eval.iou", 0.5);
  cfg.eval_split = kv.get_str("eval.split", "test");
  cfg.bench_runs = static_cast<int>(kv.get_int("bench.runs", 100));
  cfg.infer_margin = kv.get_double("infer.margin", 0.05);

  const std::vector<std::string> unknown = kv.unused_keys();
  if (!unknown.empty()) {
    std::string msg = path + ": unknown key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ConfigError(msg);
  }

  if (cfg.train.epochs < 1 || cfg.train.batch < 1)
    throw ConfigError(path + ": train.epochs and train.batch must be >= 1");
  if (cfg.train.lr <= 0) throw ConfigError(path + ": train.lr must be positive");
  if (cfg.eval_iou < 0 || cfg.eval_iou > 1) throw ConfigError(path + ": eval.iou must be in [0,1]");
  if (cfg.infer_margin < 0 || cfg.infer_margin > 0.5)
    throw ConfigError(path + ": infer.margin must be in [0,0.5]");
  if (cfg.gen_fractions.size() != 3)
    throw ConfigError(path + ": gen.fractions must have 3 entries");
  cfg.vm.validate();
  cfg.lm.validate();
  cfg.det.validate();
  cfg.aug.validate();
  return cfg;
}

}  // namespace platekit
