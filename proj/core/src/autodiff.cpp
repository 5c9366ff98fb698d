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

#include "platekit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace platekit {

template <typename T>
const Tensor<T>& Var<T>::value() const {
  if (!valid()) throw Error("value() on an invalid Var");
  return tape->value(*this);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

template <typename T>
Var<T> Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  if (consumed_) throw Error("tape already consumed by backward(); reset() first");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var<T> Tape<T>::push(Tensor<T> value, const std::vector<Var<T>>& parents, BackwardFn backward) {
  if (consumed_) throw Error("tape already consumed by backward(); reset() first");
  bool needs = false;
  for (const Var<T>& p : parents) {
    if (p.tape != this) throw Error("op inputs recorded on different tapes");
    if (node(p.id).requires_grad) needs = true;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var<T> Tape<T>::push(Tensor<T> value, std::initializer_list<Var<T>> parents, BackwardFn backward) {
  return push(std::move(value), std::vector<Var<T>>(parents), std::move(backward));
}

template <typename T>
const Tensor<T>& Tape<T>::grad(Var<T> v) const {
  const Node& n = node(v.id);
  if (n.grad.empty()) throw Error("gradient not populated; run backward() first");
  return n.grad;
}

template <typename T>
const Tensor<T>& Tape<T>::grad_of(int id) const {
  const Node& n = node(id);
  if (n.grad.empty()) throw Error("gradient not populated for node " + std::to_string(id));
  return n.grad;
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(int id) {
  Node& n = node(id);
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape != this) throw Error("backward() on a Var from another tape");
  if (consumed_) throw Error("backward() already ran on this tape");
  const Node& ln = node(loss.id);
  if (ln.value.numel() != 1)
    throw ShapeError("backward() needs a scalar loss, got " + shape_str(ln.value.shape()));
  grad_buffer(loss.id).fill(T(1));
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.backward && !n.grad.empty()) n.backward(*this, id);
  }
  consumed_ = true;
}

template <typename T>
void Tape<T>::reset() {
  nodes_.clear();
  consumed_ = false;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------
namespace kernels {

template <typename T>
void gemm_acc(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T av = arow[kk];
      const T* brow = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void transpose2d(const T* src, T* dst, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      dst[static_cast<size_t>(j) * rows + i] = src[static_cast<size_t>(i) * cols + j];
}

template void gemm_acc<float>(const float*, const float*, float*, int, int, int);
template void gemm_acc<double>(const double*, const double*, double*, int, int, int);
template void transpose2d<float>(const float*, float*, int, int);
template void transpose2d<double>(const double*, double*, int, int);

}  // namespace kernels

namespace {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.ptr();
  const T* s = src.ptr();
  const int64_t n = dst.numel();
  for (int64_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise and broadcast ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Tensor<T> out = av;
  accumulate(out, bv);
  const int ai = a.id, bi = b.id;
  return t.push(std::move(out), {a, b}, [ai, bi](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    if (tp.wants_grad(ai)) accumulate(tp.grad_buffer(ai), g);
    if (tp.wants_grad(bi)) accumulate(tp.grad_buffer(bi), g);
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  require_same_shape(av, bv, "sub");
  Tensor<T> out = av;
  const T* bp = bv.ptr();
  T* op = out.ptr();
  for (int64_t i = 0; i < out.numel(); ++i) op[i] -= bp[i];
  const int ai = a.id, bi = b.id;
  return t.push(std::move(out), {a, b}, [ai, bi](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    if (tp.wants_grad(ai)) accumulate(tp.grad_buffer(ai), g);
    if (tp.wants_grad(bi)) {
      Tensor<T>& gb = tp.grad_buffer(bi);
      for (int64_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  require_same_shape(av, bv, "mul");
  Tensor<T> out = av;
  const T* bp = bv.ptr();
  T* op = out.ptr();
  for (int64_t i = 0; i < out.numel(); ++i) op[i] *= bp[i];
  const int ai = a.id, bi = b.id;
  return t.push(std::move(out), {a, b}, [ai, bi](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& av2 = tp.value_of(ai);
    const Tensor<T>& bv2 = tp.value_of(bi);
    if (tp.wants_grad(ai)) {
      Tensor<T>& ga = tp.grad_buffer(ai);
      for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (tp.wants_grad(bi)) {
      Tensor<T>& gb = tp.grad_buffer(bi);
      for (int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tape<T>& t = *a.tape;
  Tensor<T> out = t.value(a);
  for (T& v : out.data()) v *= s;
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai, s](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    if (tp.wants_grad(ai)) {
      Tensor<T>& ga = tp.grad_buffer(ai);
      for (int64_t i = 0; i < g.numel(); ++i) ga[i] += s * g[i];
    }
  });
}

template <typename T>
Var<T> add_lastdim(Var<T> x, Var<T> v) {
  Tape<T>& t = *x.tape;
  const Tensor<T>& xv = t.value(x);
  const Tensor<T>& vv = t.value(v);
  if (vv.ndim() != 1 || xv.ndim() < 1 || xv.dim(xv.ndim() - 1) != vv.dim(0))
    throw ShapeError("add_lastdim: " + shape_str(xv.shape()) + " + " + shape_str(vv.shape()));
  const int n = vv.dim(0);
  const int64_t rows = xv.numel() / n;
  Tensor<T> out = xv;
  T* op = out.ptr();
  const T* vp = vv.ptr();
  for (int64_t r = 0; r < rows; ++r)
    for (int j = 0; j < n; ++j) op[r * n + j] += vp[j];
  const int xi = x.id, vi = v.id;
  return t.push(std::move(out), {x, v}, [xi, vi, n, rows](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    if (tp.wants_grad(xi)) accumulate(tp.grad_buffer(xi), g);
    if (tp.wants_grad(vi)) {
      Tensor<T>& gv = tp.grad_buffer(vi);
      const T* gp = g.ptr();
      for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < n; ++j) gv[j] += gp[r * n + j];
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  if (av.ndim() != 2 || bv.ndim() != 2)
    throw ShapeError("matmul: need rank-2 operands, got " + shape_str(av.shape()) + " and " +
                     shape_str(bv.shape()));
  if (av.dim(1) != bv.dim(0))
    throw ShapeError("matmul: inner extents differ, " + shape_str(av.shape()) + " x " +
                     shape_str(bv.shape()));
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor<T> out({m, n});
  kernels::gemm_acc(av.ptr(), bv.ptr(), out.ptr(), m, k, n);
  const int ai = a.id, bi = b.id;
  return t.push(std::move(out), {a, b}, [ai, bi, m, k, n](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);  // [m,n]
    if (tp.wants_grad(ai)) {
      // dA += g . B^T
      Tensor<T> bt({n, k});
      kernels::transpose2d(tp.value_of(bi).ptr(), bt.ptr(), k, n);
      kernels::gemm_acc(g.ptr(), bt.ptr(), tp.grad_buffer(ai).ptr(), m, n, k);
    }
    if (tp.wants_grad(bi)) {
      // dB += A^T . g
      Tensor<T> at({k, m});
      kernels::transpose2d(tp.value_of(ai).ptr(), at.ptr(), m, k);
      kernels::gemm_acc(at.ptr(), g.ptr(), tp.grad_buffer(bi).ptr(), k, m, n);
    }
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  if (av.ndim() != 2) throw ShapeError("transpose: need rank-2, got " + shape_str(av.shape()));
  const int m = av.dim(0), n = av.dim(1);
  Tensor<T> out({n, m});
  kernels::transpose2d(av.ptr(), out.ptr(), m, n);
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai, m, n](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);  // [n,m]
    Tensor<T> gt({m, n});
    kernels::transpose2d(g.ptr(), gt.ptr(), n, m);
    accumulate(tp.grad_buffer(ai), gt);
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
  Tape<T>& t = *a.tape;
  Tensor<T> out = t.value(a).reshaped(std::move(shape));
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
}

template <typename T>
Var<T> slice_cols(Var<T> a, int c0, int c1) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  if (av.ndim() != 2) throw ShapeError("slice_cols: need rank-2, got " + shape_str(av.shape()));
  const int m = av.dim(0), n = av.dim(1);
  if (c0 < 0 || c1 > n || c0 >= c1)
    throw ShapeError("slice_cols: bad range [" + std::to_string(c0) + "," + std::to_string(c1) +
                     ") for " + shape_str(av.shape()));
  const int w = c1 - c0;
  Tensor<T> out({m, w});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j) out[i * w + j] = av[static_cast<int64_t>(i) * n + c0 + j];
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai, m, n, c0, w](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) ga[static_cast<int64_t>(i) * n + c0 + j] += g[i * w + j];
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape<T>& t = *parts[0].tape;
  const int m = t.value(parts[0]).dim(0);
  int total = 0;
  for (const Var<T>& p : parts) {
    const Tensor<T>& pv = t.value(p);
    if (pv.ndim() != 2 || pv.dim(0) != m)
      throw ShapeError("concat_cols: incompatible part " + shape_str(pv.shape()));
    total += pv.dim(1);
  }
  Tensor<T> out({m, total});
  int off = 0;
  for (const Var<T>& p : parts) {
    const Tensor<T>& pv = t.value(p);
    const int w = pv.dim(1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) out[static_cast<int64_t>(i) * total + off + j] = pv[i * w + j];
    off += w;
  }
  std::vector<int> ids;
  std::vector<int> widths;
  for (const Var<T>& p : parts) {
    ids.push_back(p.id);
    widths.push_back(t.value(p).dim(1));
  }
  return t.push(std::move(out), parts, [ids, widths, m, total](Tape<T>& tp, int oi) {
    const Tensor<T>& g = tp.grad_of(oi);
    int off = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      const int w = widths[k];
      if (tp.wants_grad(ids[k])) {
        Tensor<T>& gp = tp.grad_buffer(ids[k]);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < w; ++j) gp[i * w + j] += g[static_cast<int64_t>(i) * total + off + j];
      }
      off += w;
    }
  });
}

// ---------------------------------------------------------------------------
// Nonlinearities
// ---------------------------------------------------------------------------

template <typename T>
Var<T> relu(Var<T> a) {
  Tape<T>& t = *a.tape;
  Tensor<T> out = t.value(a);
  for (T& v : out.data())
    if (v < T(0)) v = T(0);
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& x = tp.value_of(ai);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < g.numel(); ++i)
      if (x[i] > T(0)) ga[i] += g[i];
  });
}

template <typename T>
Var<T> gelu(Var<T> a) {
  Tape<T>& t = *a.tape;
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  Tensor<T> out = t.value(a);
  for (T& v : out.data()) {
    const double x = static_cast<double>(v);
    v = static_cast<T>(0.5 * x * (1.0 + std::erf(x * kInvSqrt2)));
  }
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& xv = tp.value_of(ai);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < g.numel(); ++i) {
      const double x = static_cast<double>(xv[i]);
      const double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475244));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga[i] += g[i] * static_cast<T>(cdf + x * pdf);
    }
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  Tape<T>& t = *a.tape;
  Tensor<T> out = t.value(a);
  for (T& v : out.data()) {
    if (v >= T(0)) {
      v = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T(1) + e);
    }
  }
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& y = tp.value_of(oi);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var<T> exp_(Var<T> a) {
  Tape<T>& t = *a.tape;
  Tensor<T> out = t.value(a);
  for (T& v : out.data()) v = std::exp(v);
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& y = tp.value_of(oi);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i];
  });
}

// ---------------------------------------------------------------------------
// Softmax / LayerNorm / losses
// ---------------------------------------------------------------------------

namespace {

struct AxisSplit {
  int64_t outer;
  int n;
  int64_t inner;
};

inline AxisSplit split_axis(const Shape& shape, int axis) {
  const int nd = static_cast<int>(shape.size());
  if (axis < 0) axis += nd;
  if (axis < 0 || axis >= nd)
    throw ShapeError("axis " + std::to_string(axis) + " invalid for " + shape_str(shape));
  AxisSplit s{1, shape[static_cast<size_t>(axis)], 1};
  for (int i = 0; i < axis; ++i) s.outer *= shape[static_cast<size_t>(i)];
  for (int i = axis + 1; i < nd; ++i) s.inner *= shape[static_cast<size_t>(i)];
  return s;
}

}  // namespace

template <typename T>
Var<T> softmax(Var<T> a, int axis) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  const AxisSplit s = split_axis(av.shape(), axis);
  Tensor<T> out(av.shape());
  const T* x = av.ptr();
  T* y = out.ptr();
  const T neg_inf = -std::numeric_limits<T>::infinity();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t in = 0; in < s.inner; ++in) {
      const int64_t base = o * s.n * s.inner + in;
      T mx = neg_inf;
      for (int j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * s.inner]);
      if (mx == neg_inf)
        throw ValueError("softmax: slice is entirely -inf (degenerate row)");
      T sum = T(0);
      for (int j = 0; j < s.n; ++j) {
        const T e = std::exp(x[base + j * s.inner] - mx);
        y[base + j * s.inner] = e;
        sum += e;
      }
      const T inv = T(1) / sum;
      for (int j = 0; j < s.n; ++j) y[base + j * s.inner] *= inv;
    }
  }
  const int ai = a.id;
  return t.push(std::move(out), {a}, [ai, s](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    const Tensor<T>& y2 = tp.value_of(oi);
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t o = 0; o < s.outer; ++o) {
      for (int64_t in = 0; in < s.inner; ++in) {
        const int64_t base = o * s.n * s.inner + in;
        T dot = T(0);
        for (int j = 0; j < s.n; ++j) dot += y2[base + j * s.inner] * g[base + j * s.inner];
        for (int j = 0; j < s.n; ++j) {
          const int64_t ix = base + j * s.inner;
          ga[ix] += y2[ix] * (g[ix] - dot);
        }
      }
    }
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  Tape<T>& t = *x.tape;
  const Tensor<T>& xv = t.value(x);
  const Tensor<T>& gv = t.value(gain);
  const Tensor<T>& bv = t.value(bias);
  if (eps <= T(0)) throw ValueError("layer_norm: eps must be positive");
  const int n = xv.dim(xv.ndim() - 1);
  if (gv.ndim() != 1 || gv.dim(0) != n || bv.ndim() != 1 || bv.dim(0) != n)
    throw ShapeError("layer_norm: gain/bias must be [" + std::to_string(n) + "]");
  const int64_t rows = xv.numel() / n;
  Tensor<T> out(xv.shape());
  std::vector<T> mean(static_cast<size_t>(rows)), rstd(static_cast<size_t>(rows));
  const T* xp = xv.ptr();
  T* op = out.ptr();
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = xp + r * n;
    T m = T(0);
    for (int j = 0; j < n; ++j) m += row[j];
    m /= T(n);
    T var = T(0);
    for (int j = 0; j < n; ++j) {
      const T d = row[j] - m;
      var += d * d;
    }
    var /= T(n);
    const T rs = T(1) / std::sqrt(var + eps);
    mean[static_cast<size_t>(r)] = m;
    rstd[static_cast<size_t>(r)] = rs;
    for (int j = 0; j < n; ++j) op[r * n + j] = (row[j] - m) * rs * gv[j] + bv[j];
  }
  const int xi = x.id, gi = gain.id, bi = bias.id;
  return t.push(std::move(out), {x, gain, bias},
                [xi, gi, bi, n, rows, mean, rstd](Tape<T>& tp, int oi) {
                  const Tensor<T>& g = tp.grad_of(oi);
                  const Tensor<T>& xv2 = tp.value_of(xi);
                  const Tensor<T>& gain2 = tp.value_of(gi);
                  const bool wx = tp.wants_grad(xi), wg = tp.wants_grad(gi), wb = tp.wants_grad(bi);
                  Tensor<T>* gx = wx ? &tp.grad_buffer(xi) : nullptr;
                  Tensor<T>* gg = wg ? &tp.grad_buffer(gi) : nullptr;
                  Tensor<T>* gb = wb ? &tp.grad_buffer(bi) : nullptr;
                  for (int64_t r = 0; r < rows; ++r) {
                    const T m = mean[static_cast<size_t>(r)];
                    const T rs = rstd[static_cast<size_t>(r)];
                    const T* xrow = xv2.ptr() + r * n;
                    const T* grow = g.ptr() + r * n;
                    if (wg || wb) {
                      for (int j = 0; j < n; ++j) {
                        if (wb) (*gb)[j] += grow[j];
                        if (wg) (*gg)[j] += grow[j] * (xrow[j] - m) * rs;
                      }
                    }
                    if (wx) {
                      T s1 = T(0), s2 = T(0);
                      for (int j = 0; j < n; ++j) {
                        const T gh = grow[j] * gain2[j];
                        const T xh = (xrow[j] - m) * rs;
                        s1 += gh;
                        s2 += gh * xh;
                      }
                      s1 /= T(n);
                      s2 /= T(n);
                      for (int j = 0; j < n; ++j) {
                        const T gh = grow[j] * gain2[j];
                        const T xh = (xrow[j] - m) * rs;
                        (*gx)[r * n + j] += rs * (gh - s1 - xh * s2);
                      }
                    }
                  }
                });
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void im2col(const Tensor<T>& x, int kh, int kw, int stride, int pad, int oh, int ow,
            Tensor<T>& col) {
  const int h = x.dim(0), w = x.dim(1), ci = x.dim(2);
  const T* xp = x.ptr();
  T* cp = col.ptr();
  const int kcols = kh * kw * ci;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      T* row = cp + (static_cast<int64_t>(oy) * ow + ox) * kcols;
      int c = 0;
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride + ky - pad;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
            const T* src = xp + (static_cast<int64_t>(iy) * w + ix) * ci;
            for (int cc = 0; cc < ci; ++cc) row[c++] = src[cc];
          } else {
            for (int cc = 0; cc < ci; ++cc) row[c++] = T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_acc(const Tensor<T>& col, int kh, int kw, int stride, int pad, int oh, int ow,
                Tensor<T>& dx) {
  const int h = dx.dim(0), w = dx.dim(1), ci = dx.dim(2);
  const T* cp = col.ptr();
  T* xp = dx.ptr();
  const int kcols = kh * kw * ci;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const T* row = cp + (static_cast<int64_t>(oy) * ow + ox) * kcols;
      int c = 0;
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride + ky - pad;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
            T* dst = xp + (static_cast<int64_t>(iy) * w + ix) * ci;
            for (int cc = 0; cc < ci; ++cc) dst[cc] += row[c++];
          } else {
            c += ci;
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, int stride, int pad) {
  Tape<T>& t = *x.tape;
  const Tensor<T>& xv = t.value(x);
  const Tensor<T>& wv = t.value(w);
  if (xv.ndim() != 3) throw ShapeError("conv2d: input must be [H,W,C], got " + shape_str(xv.shape()));
  if (wv.ndim() != 4)
    throw ShapeError("conv2d: kernel must be [KH,KW,Ci,Co], got " + shape_str(wv.shape()));
  if (stride < 1) throw ValueError("conv2d: stride must be >= 1");
  if (pad < 0) throw ValueError("conv2d: pad must be >= 0");
  const int h = xv.dim(0), iw = xv.dim(1), ci = xv.dim(2);
  const int kh = wv.dim(0), kw = wv.dim(1), wci = wv.dim(2), co = wv.dim(3);
  if (ci != wci)
    throw ShapeError("conv2d: channel mismatch, input " + std::to_string(ci) + " vs kernel " +
                     std::to_string(wci));
  if (kh > h + 2 * pad || kw > iw + 2 * pad)
    throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " larger than padded input " + std::to_string(h + 2 * pad) + "x" +
                     std::to_string(iw + 2 * pad));
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (iw + 2 * pad - kw) / stride + 1;
  const int p = oh * ow, kc = kh * kw * ci;

  Tensor<T> col({p, kc});
  im2col(xv, kh, kw, stride, pad, oh, ow, col);
  Tensor<T> out2d({p, co});
  kernels::gemm_acc(col.ptr(), wv.ptr(), out2d.ptr(), p, kc, co);
  Tensor<T> out = out2d.reshaped({oh, ow, co});

  const int xi = x.id, wi = w.id;
  return t.push(std::move(out), {x, w},
                [xi, wi, col = std::move(col), kh, kw, stride, pad, oh, ow, p, kc,
                 co](Tape<T>& tp, int oi) {
                  const Tensor<T> g2d = tp.grad_of(oi).reshaped({p, co});
                  if (tp.wants_grad(wi)) {
                    Tensor<T> colT({kc, p});
                    kernels::transpose2d(col.ptr(), colT.ptr(), p, kc);
                    Tensor<T> dw({kc, co});
                    kernels::gemm_acc(colT.ptr(), g2d.ptr(), dw.ptr(), kc, p, co);
                    accumulate(tp.grad_buffer(wi), dw.reshaped(tp.value_of(wi).shape()));
                  }
                  if (tp.wants_grad(xi)) {
                    const Tensor<T>& wv2 = tp.value_of(wi);
                    Tensor<T> wT({co, kc});
                    kernels::transpose2d(wv2.ptr(), wT.ptr(), kc, co);
                    Tensor<T> dcol({p, kc});
                    kernels::gemm_acc(g2d.ptr(), wT.ptr(), dcol.ptr(), p, co, kc);
                    col2im_acc(dcol, kh, kw, stride, pad, oh, ow, tp.grad_buffer(xi));
                  }
                });
}

template <typename T>
Var<T> upsample_nearest2x(Var<T> x) {
  Tape<T>& t = *x.tape;
  const Tensor<T>& xv = t.value(x);
  if (xv.ndim() != 3)
    throw ShapeError("upsample_nearest2x: input must be [H,W,C], got " + shape_str(xv.shape()));
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  Tensor<T> out({2 * h, 2 * w, c});
  const T* xp = xv.ptr();
  T* op = out.ptr();
  for (int y = 0; y < 2 * h; ++y) {
    for (int xx = 0; xx < 2 * w; ++xx) {
      const T* src = xp + (static_cast<int64_t>(y / 2) * w + xx / 2) * c;
      T* dst = op + (static_cast<int64_t>(y) * 2 * w + xx) * c;
      for (int cc = 0; cc < c; ++cc) dst[cc] = src[cc];
    }
  }
  const int xi = x.id;
  return t.push(std::move(out), {x}, [xi, h, w, c](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(xi)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    Tensor<T>& gx = tp.grad_buffer(xi);
    const T* gp = g.ptr();
    for (int y = 0; y < 2 * h; ++y)
      for (int xx = 0; xx < 2 * w; ++xx) {
        T* dst = gx.ptr() + (static_cast<int64_t>(y / 2) * w + xx / 2) * c;
        const T* src = gp + (static_cast<int64_t>(y) * 2 * w + xx) * c;
        for (int cc = 0; cc < c; ++cc) dst[cc] += src[cc];
      }
  });
}

template <typename T>
Var<T> embedding(Var<T> weight, const std::vector<int>& indices) {
  Tape<T>& t = *weight.tape;
  const Tensor<T>& wv = t.value(weight);
  if (wv.ndim() != 2) throw ShapeError("embedding: weight must be [V,D]");
  const int v = wv.dim(0), d = wv.dim(1);
  for (int ix : indices)
    if (ix < 0 || ix >= v)
      throw ValueError("embedding: index " + std::to_string(ix) + " out of range [0," +
                       std::to_string(v) + ")");
  const int n = static_cast<int>(indices.size());
  Tensor<T> out({n, d});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<int64_t>(i) * d + j] = wv[static_cast<int64_t>(indices[static_cast<size_t>(i)]) * d + j];
  const int wi = weight.id;
  return t.push(std::move(out), {weight}, [wi, indices, d](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(wi)) return;
    const Tensor<T>& g = tp.grad_of(oi);
    Tensor<T>& gw = tp.grad_buffer(wi);
    for (size_t i = 0; i < indices.size(); ++i)
      for (int j = 0; j < d; ++j)
        gw[static_cast<int64_t>(indices[i]) * d + j] += g[static_cast<int64_t>(i) * d + j];
  });
}

// ---------------------------------------------------------------------------
// Reductions and losses
// ---------------------------------------------------------------------------

template <typename T>
Var<T> sum_all(Var<T> a) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  T s = T(0);
  for (const T& v : av.data()) s += v;  // row-major accumulation
  const int ai = a.id;
  return t.push(Tensor<T>::scalar(s), {a}, [ai](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const T g = tp.grad_of(oi)[0];
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

template <typename T>
Var<T> mean_all(Var<T> a) {
  Tape<T>& t = *a.tape;
  const Tensor<T>& av = t.value(a);
  T s = T(0);
  for (const T& v : av.data()) s += v;
  const T inv = T(1) / static_cast<T>(av.numel());
  const int ai = a.id;
  return t.push(Tensor<T>::scalar(s * inv), {a}, [ai, inv](Tape<T>& tp, int oi) {
    if (!tp.wants_grad(ai)) return;
    const T g = tp.grad_of(oi)[0] * inv;
    Tensor<T>& ga = tp.grad_buffer(ai);
    for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets, int ignore_index) {
  Tape<T>& t = *logits.tape;
  const Tensor<T>& lv = t.value(logits);
  if (lv.ndim() != 2) throw ShapeError("cross_entropy: logits must be [N,A]");
  const int n = lv.dim(0), a = lv.dim(1);
  if (static_cast<int>(targets.size()) != n)
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(n) + " rows");
  int count = 0;
  for (int tg : targets) {
    if (tg == ignore_index) continue;
    if (tg < 0 || tg >= a)
      throw ValueError("cross_entropy: target " + std::to_string(tg) + " out of range [0," +
                       std::to_string(a) + ")");
    ++count;
  }
  if (count == 0) throw ValueError("cross_entropy: every row is ignored");

  T total = T(0);
  const T* lp = lv.ptr();
  for (int i = 0; i < n; ++i) {
    if (targets[static_cast<size_t>(i)] == ignore_index) continue;
    const T* row = lp + static_cast<int64_t>(i) * a;
    T mx = row[0];
    for (int j = 1; j < a; ++j) mx = std::max(mx, row[j]);
    T sum = T(0);
    for (int j = 0; j < a; ++j) sum += std::exp(row[j] - mx);
    total += mx + std::log(sum) - row[targets[static_cast<size_t>(i)]];
  }
  const T loss = total / static_cast<T>(count);

  const int li = logits.id;
  return t.push(Tensor<T>::scalar(loss), {logits},
                [li, targets, ignore_index, n, a, count](Tape<T>& tp, int oi) {
                  if (!tp.wants_grad(li)) return;
                  const T g = tp.grad_of(oi)[0] / static_cast<T>(count);
                  const Tensor<T>& lv2 = tp.value_of(li);
                  Tensor<T>& gl = tp.grad_buffer(li);
                  for (int i = 0; i < n; ++i) {
                    const int tg = targets[static_cast<size_t>(i)];
                    if (tg == ignore_index) continue;
                    const T* row = lv2.ptr() + static_cast<int64_t>(i) * a;
                    T mx = row[0];
                    for (int j = 1; j < a; ++j) mx = std::max(mx, row[j]);
                    T sum = T(0);
                    for (int j = 0; j < a; ++j) sum += std::exp(row[j] - mx);
                    const T inv = T(1) / sum;
                    for (int j = 0; j < a; ++j) {
                      T p = std::exp(row[j] - mx) * inv;
                      if (j == tg) p -= T(1);
                      gl[static_cast<int64_t>(i) * a + j] += g * p;
                    }
                  }
                });
}

// ---------------------------------------------------------------------------
// Explicit instantiations
// ---------------------------------------------------------------------------

#define PLATEKIT_INSTANTIATE(T)                                                            \
  template struct Var<T>;                                                                  \
  template class Tape<T>;                                                                  \
  template Var<T> add<T>(Var<T>, Var<T>);                                                  \
  template Var<T> sub<T>(Var<T>, Var<T>);                                                  \
  template Var<T> mul<T>(Var<T>, Var<T>);                                                  \
  template Var<T> scale<T>(Var<T>, T);                                                     \
  template Var<T> add_lastdim<T>(Var<T>, Var<T>);                                          \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                               \
  template Var<T> transpose<T>(Var<T>);                                                    \
  template Var<T> reshape<T>(Var<T>, Shape);                                               \
  template Var<T> slice_cols<T>(Var<T>, int, int);                                         \
  template Var<T> concat_cols<T>(const std::vector<Var<T>>&);                              \
  template Var<T> relu<T>(Var<T>);                                                         \
  template Var<T> gelu<T>(Var<T>);                                                         \
  template Var<T> sigmoid<T>(Var<T>);                                                      \
  template Var<T> exp_<T>(Var<T>);                                                         \
  template Var<T> softmax<T>(Var<T>, int);                                                 \
  template Var<T> layer_norm<T>(Var<T>, Var<T>, Var<T>, T);                                \
  template Var<T> conv2d<T>(Var<T>, Var<T>, int, int);                                     \
  template Var<T> upsample_nearest2x<T>(Var<T>);                                           \
  template Var<T> embedding<T>(Var<T>, const std::vector<int>&);                           \
  template Var<T> sum_all<T>(Var<T>);                                                      \
  template Var<T> mean_all<T>(Var<T>);                                                     \
  template Var<T> cross_entropy<T>(Var<T>, const std::vector<int>&, int);

PLATEKIT_INSTANTIATE(float)
PLATEKIT_INSTANTIATE(double)

#undef PLATEKIT_INSTANTIATE

}  // namespace platekit
