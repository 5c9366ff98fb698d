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

#include "platekit/optim.hpp"

#include <cmath>

#include "platekit/errors.hpp"

namespace platekit {

template <typename T>
void Adam<T>::step(const std::vector<Tensor<T>*>& params,
                   const std::vector<const Tensor<T>*>& grads) {
  if (params.size() != grads.size())
    throw Error("Adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = Tensor<T>(params[i]->shape());
      v_[i] = Tensor<T>(params[i]->shape());
    }
  }
  if (m_.size() != params.size()) throw Error("Adam: parameter list changed between steps");

  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  const T lr = static_cast<T>(cfg_.lr);
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T eps = static_cast<T>(cfg_.eps);
  const T inv_bc1 = static_cast<T>(1.0 / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    if (grads[i] == nullptr) throw Error("Adam: missing gradient for parameter " + std::to_string(i));
    const Tensor<T>& g = *grads[i];
    if (!p.same_shape(g))
      throw ShapeError("Adam: gradient shape " + shape_str(g.shape()) + " != parameter shape " +
                       shape_str(p.shape()));
    if (!m_[i].same_shape(p)) throw ShapeError("Adam: moment buffer shape drifted");
    Tensor<T>& m = m_[i];
    Tensor<T>& v = v_[i];
    for (int64_t j = 0; j < p.numel(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T mhat = m[j] * inv_bc1;
      const T vhat = v[j] * inv_bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace platekit
