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

#include "platekit/checkpoint.hpp"

#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "platekit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; big-endian hosts are unsupported");

namespace platekit {

namespace {

constexpr char kMagic[] = "platekit-checkpoint";

void check_name(const std::string& name) {
  if (name.empty()) throw IoError("checkpoint: empty tensor name");
  for (char c : name)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw IoError("checkpoint: tensor name contains whitespace: '" + name + "'");
}

}  // namespace

std::vector<CheckpointEntry> checkpoint_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw IoError("not a platekit checkpoint: " + path);
  int version = -1;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "version %d", &version) != 1)
    throw IoError("checkpoint missing version field: " + path);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                  std::to_string(kCheckpointVersion) + "): " + path);
  size_t count = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "tensors %zu", &count) != 1)
    throw IoError("checkpoint missing tensor count: " + path);

  std::vector<CheckpointEntry> entries;
  entries.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw IoError("checkpoint header truncated: " + path);
    std::istringstream ls(line);
    CheckpointEntry e;
    int ndim = 0;
    if (!(ls >> e.name >> e.dtype >> ndim)) throw IoError("bad tensor line: " + line);
    e.shape.resize(static_cast<size_t>(ndim));
    for (int d = 0; d < ndim; ++d)
      if (!(ls >> e.shape[static_cast<size_t>(d)])) throw IoError("bad tensor line: " + line);
    if (!(ls >> e.offset >> e.nbytes)) throw IoError("bad tensor line: " + line);
    entries.push_back(std::move(e));
  }
  if (!std::getline(in, line) || line != "payload")
    throw IoError("checkpoint missing payload marker: " + path);
  return entries;
}

void save_checkpoint(const std::string& path, const ParamList<float>& params) {
  std::ostringstream header;
  header << kMagic << "\n";
  header << "version " << kCheckpointVersion << "\n";
  header << "tensors " << params.size() << "\n";
  uint64_t offset = 0;
  for (const auto& p : params) {
    check_name(p.name);
    const uint64_t nbytes = static_cast<uint64_t>(p.tensor->numel()) * sizeof(float);
    header << p.name << " f32 " << p.tensor->ndim();
    for (int d : p.tensor->shape()) header << " " << d;
    header << " " << offset << " " << nbytes << "\n";
    offset += nbytes;
  }
  header << "payload\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& p : params) {
    out.write(reinterpret_cast<const char*>(p.tensor->ptr()),
              static_cast<std::streamsize>(p.tensor->numel() * sizeof(float)));
  }
  if (!out) throw IoError("short write to checkpoint: " + path);
}

void load_checkpoint(const std::string& path, const ParamList<float>& params) {
  const std::vector<CheckpointEntry> entries = checkpoint_index(path);
  std::unordered_map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  // find payload start
  std::string line;
  std::streampos payload_start = 0;
  while (std::getline(in, line)) {
    if (line == "payload") {
      payload_start = in.tellg();
      break;
    }
  }

  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end())
      throw IoError("checkpoint " + path + " has no tensor named '" + p.name + "'");
    const CheckpointEntry& e = *it->second;
    if (e.dtype != "f32")
      throw IoError("tensor '" + p.name + "' has dtype " + e.dtype + ", expected f32");
    if (e.shape != p.tensor->shape())
      throw IoError("tensor '" + p.name + "' shape " + shape_str(e.shape) +
                    " does not match model shape " + shape_str(p.tensor->shape()));
    const uint64_t expect = static_cast<uint64_t>(p.tensor->numel()) * sizeof(float);
    if (e.nbytes != expect)
      throw IoError("tensor '" + p.name + "' payload length mismatch");
    in.seekg(payload_start + static_cast<std::streamoff>(e.offset));
    in.read(reinterpret_cast<char*>(p.tensor->ptr()), static_cast<std::streamsize>(e.nbytes));
    if (!in) throw IoError("checkpoint payload truncated at '" + p.name + "'");
  }
}

}  // namespace platekit
