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

#include <stdexcept>
#include <string>

namespace platekit {

/// Base class for all platekit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor extents do not match what an operation requires.
struct ShapeError : Error {
  using Error::Error;
};

/// A value violates an operation's input contract (non-normalized rows,
/// degenerate softmax slice, bad index, ...).
struct ValueError : Error {
  using Error::Error;
};

/// Configuration file or config object is invalid.
struct ConfigError : Error {
  using Error::Error;
};

/// Filesystem / serialization failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace platekit
