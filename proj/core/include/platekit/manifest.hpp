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

#include <string>
#include <vector>

#include "platekit/detector.hpp"

namespace platekit {

/// One dataset record. On disk this is a single tab-separated line:
///
///   <image>\t<split>\t<tags>\t<boxes>\t<strings>
///
/// tags: comma-joined, "-" when empty. boxes: "x,y,w,h" joined by ';',
/// normalized center format. strings: joined by ';'. Lines starting with '#'
/// are comments; the writer emits a "# platekit-manifest v1" header.
struct ManifestRecord {
  std::string image;  // path relative to the manifest's directory
  std::string split;  // train | val | test
  std::vector<std::string> tags;
  std::vector<BBox> boxes;
  std::vector<std::string> strings;

  bool has_tag(const std::string& tag) const;
};

struct Manifest {
  std::string dir;  // directory of the manifest file; base for image paths
  std::vector<ManifestRecord> records;

  std::string image_path(const ManifestRecord& rec) const;
  std::vector<const ManifestRecord*> split_records(const std::string& split) const;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

/// Checks box/string parity, box validity, known split labels and that every
/// image file exists. Throws ValueError/IoError with the offending record.
void validate_manifest(const Manifest& m);

}  // namespace platekit
