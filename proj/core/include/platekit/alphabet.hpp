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

#include "platekit/errors.hpp"

namespace platekit {

/// Ordered character set with reserved control symbols. PAD sits at index 0
/// and EOS at index 1 by construction; visible symbols start at index 2.
class Alphabet {
 public:
  static constexpr int kPad = 0;
  static constexpr int kEos = 1;

  Alphabet() : Alphabet(default_symbols()) {}

  /// symbols: the visible characters, unique, in canonical order.
  explicit Alphabet(const std::string& symbols);

  static std::string default_symbols() { return "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"; }

  int size() const { return static_cast<int>(symbols_.size()) + 2; }  // incl. PAD/EOS
  const std::string& symbols() const { return symbols_; }

  /// Index of a visible character (>= 2); throws ValueError when unknown.
  int index_of(char c) const {
    const int ix = lut_[static_cast<unsigned char>(c)];
    if (ix < 0) throw ValueError(std::string("character '") + c + "' not in alphabet");
    return ix;
  }
  bool contains(char c) const { return lut_[static_cast<unsigned char>(c)] >= 0; }

  /// Character for a visible index; PAD/EOS are not printable.
  char char_at(int index) const {
    if (index < 2 || index >= size())
      throw ValueError("alphabet index " + std::to_string(index) + " is not a visible symbol");
    return symbols_[static_cast<size_t>(index - 2)];
  }

  /// Targets for training: the string's characters, one EOS, then PAD up to
  /// max_len. Throws when the string needs more than max_len - 1 slots.
  std::vector<int> encode(const std::string& s, int max_len) const {
    if (static_cast<int>(s.size()) + 1 > max_len)
      throw ValueError("string '" + s + "' does not fit in " + std::to_string(max_len) +
                       " slots (one EOS required)");
    std::vector<int> out(static_cast<size_t>(max_len), kPad);
    for (size_t i = 0; i < s.size(); ++i) out[i] = index_of(s[i]);
    out[s.size()] = kEos;
    return out;
  }

 private:
  std::string symbols_;
  int lut_[256];
};

inline Alphabet::Alphabet(const std::string& symbols) : symbols_(symbols) {
  if (symbols_.size() < 2) throw ValueError("alphabet needs at least 2 visible symbols");
  for (int& v : lut_) v = -1;
  int ix = 2;
  for (char c : symbols_) {
    auto& slot = lut_[static_cast<unsigned char>(c)];
    if (slot >= 0) throw ValueError(std::string("duplicate alphabet symbol '") + c + "'");
    slot = ix++;
  }
}

}  // namespace platekit
