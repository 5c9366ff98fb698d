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

#include "platekit/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "platekit/errors.hpp"

namespace fs = std::filesystem;

namespace platekit {

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

bool ManifestRecord::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

std::string Manifest::image_path(const ManifestRecord& rec) const {
  if (dir.empty()) return rec.image;
  return (fs::path(dir) / rec.image).string();
}

std::vector<const ManifestRecord*> Manifest::split_records(const std::string& split) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(&r);
  return out;
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  Manifest m;
  m.dir = fs::path(path).parent_path().string();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 5)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 5 tab-separated fields, got " +
                    std::to_string(fields.size()));
    ManifestRecord rec;
    rec.image = fields[0];
    rec.split = fields[1];
    if (fields[2] != "-")
      for (auto& t : split_on(fields[2], ',')) rec.tags.push_back(t);
    if (fields[3] != "-") {
      for (const std::string& bs : split_on(fields[3], ';')) {
        BBox b;
        if (std::sscanf(bs.c_str(), "%lf,%lf,%lf,%lf", &b.x, &b.y, &b.w, &b.h) != 4)
          throw IoError(path + ":" + std::to_string(lineno) + ": bad box '" + bs + "'");
        rec.boxes.push_back(b);
      }
    }
    if (fields[4] != "-")
      for (auto& s : split_on(fields[4], ';')) rec.strings.push_back(s);
    m.records.push_back(std::move(rec));
  }
  return m;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << "# platekit-manifest v1\n";
  char buf[128];
  for (const auto& rec : records) {
    out << rec.image << '\t' << rec.split << '\t';
    out << (rec.tags.empty() ? "-" : join(rec.tags, ','));
    out << '\t';
    if (rec.boxes.empty()) {
      out << '-';
    } else {
      for (size_t i = 0; i < rec.boxes.size(); ++i) {
        const BBox& b = rec.boxes[i];
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g", b.x, b.y, b.w, b.h);
        out << (i ? ";" : "") << buf;
      }
    }
    out << '\t';
    out << (rec.strings.empty() ? "-" : join(rec.strings, ';'));
    out << '\n';
  }
  if (!out) throw IoError("short write: " + path);
}

void validate_manifest(const Manifest& m) {
  for (size_t i = 0; i < m.records.size(); ++i) {
    const ManifestRecord& rec = m.records[i];
    const std::string where = "record " + std::to_string(i) + " (" + rec.image + ")";
    if (rec.boxes.size() != rec.strings.size())
      throw ValueError(where + ": " + std::to_string(rec.boxes.size()) + " boxes vs " +
                       std::to_string(rec.strings.size()) + " strings");
    if (rec.split != "train" && rec.split != "val" && rec.split != "test")
      throw ValueError(where + ": unknown split '" + rec.split + "'");
    for (const BBox& b : rec.boxes)
      if (!b.valid()) throw ValueError(where + ": invalid box");
    if (!fs::exists(m.image_path(rec))) throw IoError(where + ": image file missing");
  }
}

}  // namespace platekit
