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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "platekit/errors.hpp"

namespace platekit {

using Shape = std::vector<int>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d <= 0) throw ShapeError("non-positive extent in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

/// Dense row-major shaped array. The scalar type doubles as the dtype:
/// Tensor<float> is f32, Tensor<double> is f64.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), T(0));
  }

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<int64_t>(data_.size()) != shape_numel(shape_))
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str(shape_));
  }

  static Tensor full(Shape shape, T value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
  }
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor ones(Shape shape) { return full(std::move(shape), T(1)); }
  static Tensor scalar(T value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T& at(int i) { return data_[idx({i})]; }
  T& at(int i, int j) { return data_[idx({i, j})]; }
  T& at(int i, int j, int k) { return data_[idx({i, j, k})]; }
  T& at(int i, int j, int k, int l) { return data_[idx({i, j, k, l})]; }
  const T& at(int i) const { return data_[idx({i})]; }
  const T& at(int i, int j) const { return data_[idx({i, j})]; }
  const T& at(int i, int j, int k) const { return data_[idx({i, j, k})]; }
  const T& at(int i, int j, int k, int l) const { return data_[idx({i, j, k, l})]; }

  void fill(T value) {
    for (auto& v : data_) v = value;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  /// Copy with a new shape of identical element count.
  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != numel())
      throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    return Tensor(std::move(shape), data_);
  }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  size_t idx(std::initializer_list<int> ix) const {
    if (ix.size() != shape_.size())
      throw ShapeError("indexing rank " + std::to_string(shape_.size()) + " tensor with " +
                       std::to_string(ix.size()) + " indices");
    size_t flat = 0;
    size_t k = 0;
    for (int i : ix) {
      flat = flat * static_cast<size_t>(shape_[k]) + static_cast<size_t>(i);
      ++k;
    }
    return flat;
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace platekit
