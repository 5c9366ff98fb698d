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

#include "platekit/nn.hpp"
#include "platekit/tensor.hpp"

namespace platekit {

/// Checkpoint container: a plain-text header followed by raw little-endian
/// payloads.
///
///   platekit-checkpoint
///   version 1
///   tensors <N>
///   <name> <dtype> <ndim> <d0> ... <offset> <nbytes>   (one line per tensor)
///   payload
///   <raw bytes, offsets relative to the byte after "payload\n">
///
/// Tensor names must be whitespace-free; the models use prefixes such as
/// "vm/", "lm/", "fusion/" and "det/".
constexpr int kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  std::string dtype;  // "f32" | "f64"
  Shape shape;
  uint64_t offset = 0;
  uint64_t nbytes = 0;
};

/// Header index of an existing checkpoint (no payload read).
std::vector<CheckpointEntry> checkpoint_index(const std::string& path);

void save_checkpoint(const std::string& path, const ParamList<float>& params);

/// Loads every parameter in `params` from the file; missing names, dtype or
/// shape mismatches and unsupported versions raise IoError. Tensors present
/// in the file but absent from `params` are ignored.
void load_checkpoint(const std::string& path, const ParamList<float>& params);

}  // namespace platekit
