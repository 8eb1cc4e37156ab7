// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/diffcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"

namespace vgan {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <class T>
using CMapMat = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

void require_same_dtype(const Tensor& a, const Tensor& b, const char* op) {
  if (a.dtype() != b.dtype())
    throw Error(std::string(op) + ": dtype mismatch " + dtype_name(a.dtype()) + " vs " +
                dtype_name(b.dtype()));
}

void check_output(const char* op, const Tensor& out, std::initializer_list<const Tensor*> ins) {
  if (!checked_mode() || all_finite(out)) return;
  for (const Tensor* t : ins)
    if (t && t->defined() && !all_finite(*t)) return;
  throw NumericError(std::string(op) + " produced a non-finite value from finite inputs");
}

int norm_axis(int axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  return axis;
}

std::vector<std::int64_t> strides_of(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
  return st;
}

template <class F>
Tensor map_unary(const Tensor& x, F f) {
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto in = x.data<T>();
    auto o = out.data<T>();
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  });
  return out;
}

// Iterates an output of shape `out` with per-operand strides (0 on broadcast
// axes), calling fn(out_index, a_offset, b_offset) with the innermost axis
// unrolled into a tight loop.
template <class F>
void broadcast_loop(const Shape& out, const std::vector<std::int64_t>& sa,
                    const std::vector<std::int64_t>& sb, F fn) {
  const int r = static_cast<int>(out.size());
  const std::int64_t inner = out[r - 1];
  const std::int64_t ia = sa[r - 1], ib = sb[r - 1];
  const std::int64_t outer = shape_numel(out) / inner;
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t oa = 0, ob = 0, o = 0;
  for (std::int64_t q = 0; q < outer; ++q) {
    fn(o, oa, ob, inner, ia, ib);
    o += inner;
    for (int d = r - 2; d >= 0; --d) {
      if (++idx[d] < out[d]) {
        oa += sa[d];
        ob += sb[d];
        break;
      }
      oa -= sa[d] * (out[d] - 1);
      ob -= sb[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
}

std::vector<std::int64_t> aligned_strides(const Shape& s, const Shape& out) {
  const std::size_t r = out.size();
  std::vector<std::int64_t> st(r, 0);
  auto own = strides_of(s);
  const std::size_t lead = r - s.size();
  for (std::size_t i = 0; i < s.size(); ++i)
    st[lead + i] = (s[i] == 1 && out[lead + i] != 1) ? 0 : own[i];
  return st;
}

template <class Op>
Tensor binary_kernel(const Tensor& a, const Tensor& b, Op op) {
  const Shape out_shape = broadcast_shapes(a.shape(), b.shape());
  Tensor out = Tensor::zeros(out_shape, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* pa = a.data<T>().data();
    const T* pb = b.data<T>().data();
    T* po = out.data<T>().data();
    const std::int64_t n = out.numel();
    if (a.shape() == b.shape()) {
      for (std::int64_t i = 0; i < n; ++i) po[i] = op(pa[i], pb[i]);
      return;
    }
    if (b.numel() == 1 && a.numel() == n) {
      const T v = pb[0];
      for (std::int64_t i = 0; i < n; ++i) po[i] = op(pa[i], v);
      return;
    }
    if (a.numel() == 1 && b.numel() == n) {
      const T v = pa[0];
      for (std::int64_t i = 0; i < n; ++i) po[i] = op(v, pb[i]);
      return;
    }
    const auto sa = aligned_strides(a.shape(), out_shape);
    const auto sb = aligned_strides(b.shape(), out_shape);
    broadcast_loop(out_shape, sa, sb,
                   [&](std::int64_t o, std::int64_t oa, std::int64_t ob, std::int64_t inner,
                       std::int64_t ia, std::int64_t ib) {
                     for (std::int64_t k = 0; k < inner; ++k)
                       po[o + k] = op(pa[oa + k * ia], pb[ob + k * ib]);
                   });
  });
  return out;
}

}  // namespace

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const std::int64_t ea = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const std::int64_t eb = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (ea != eb && ea != 1 && eb != 1)
      throw ShapeError("cannot broadcast shapes " + shape_str(a) + " and " + shape_str(b));
    out[i] = std::max(ea, eb);
  }
  return out;
}

// ---------------------------------------------------------------- unary ops

Tensor sin(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return std::sin(v); });
  check_output("sin", out, {&x});
  if (should_record({&x}))
    record("sin", {x}, out, [x](const Tensor& g) { return std::vector<Tensor>{mul(g, cos(x))}; });
  return out;
}

Tensor cos(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return std::cos(v); });
  check_output("cos", out, {&x});
  if (should_record({&x}))
    record("cos", {x}, out,
           [x](const Tensor& g) { return std::vector<Tensor>{neg(mul(g, sin(x)))}; });
  return out;
}

Tensor exp(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return std::exp(v); });
  check_output("exp", out, {&x});
  if (should_record({&x}))
    record("exp", {x}, out, [out](const Tensor& g) { return std::vector<Tensor>{mul(g, out)}; });
  return out;
}

Tensor log(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return std::log(v); });
  check_output("log", out, {&x});
  if (should_record({&x}))
    record("log", {x}, out, [x](const Tensor& g) { return std::vector<Tensor>{div(g, x)}; });
  return out;
}

Tensor neg(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return -v; });
  if (should_record({&x}))
    record("neg", {x}, out, [](const Tensor& g) { return std::vector<Tensor>{neg(g)}; });
  return out;
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor out = map_unary(x, [slope](auto v) {
    using T = decltype(v);
    return v > T(0) ? v : static_cast<T>(slope) * v;
  });
  if (should_record({&x})) {
    Tensor mask = map_unary(x, [slope](auto v) {
      using T = decltype(v);
      return v > T(0) ? T(1) : static_cast<T>(slope);
    });
    record("leaky_relu", {x}, out,
           [mask](const Tensor& g) { return std::vector<Tensor>{mul(g, mask)}; });
  }
  return out;
}

Tensor softplus(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) {
    using T = decltype(v);
    return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v)));
  });
  check_output("softplus", out, {&x});
  if (should_record({&x}))
    record("softplus", {x}, out,
           [x](const Tensor& g) { return std::vector<Tensor>{mul(g, sigmoid(x))}; });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) {
    using T = decltype(v);
    if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
    const T e = std::exp(v);
    return e / (T(1) + e);
  });
  if (should_record({&x}))
    record("sigmoid", {x}, out, [out](const Tensor& g) {
      return std::vector<Tensor>{mul(g, mul(out, add(neg(out), 1.0)))};
    });
  return out;
}

Tensor tanh(const Tensor& x) {
  Tensor out = map_unary(x, [](auto v) { return std::tanh(v); });
  if (should_record({&x}))
    record("tanh", {x}, out, [out](const Tensor& g) {
      return std::vector<Tensor>{mul(g, add(neg(square(out)), 1.0))};
    });
  return out;
}

Tensor pow(const Tensor& x, double p) {
  Tensor out = map_unary(x, [p](auto v) {
    using T = decltype(v);
    return static_cast<T>(std::pow(v, static_cast<T>(p)));
  });
  check_output("pow", out, {&x});
  if (should_record({&x}))
    record("pow", {x}, out, [x, p](const Tensor& g) {
      return std::vector<Tensor>{mul(g, mul(pow(x, p - 1.0), p))};
    });
  return out;
}

Tensor square(const Tensor& x) { return mul(x, x); }

Tensor apply_elementwise(const Tensor& x, UnaryFn fn, double param) {
  switch (fn) {
    case UnaryFn::sin: return sin(x);
    case UnaryFn::cos: return cos(x);
    case UnaryFn::exp: return exp(x);
    case UnaryFn::log: return log(x);
    case UnaryFn::neg: return neg(x);
    case UnaryFn::leaky_relu: return leaky_relu(x, param);
    case UnaryFn::softplus: return softplus(x);
    case UnaryFn::sigmoid: return sigmoid(x);
    case UnaryFn::tanh: return tanh(x);
  }
  throw Error("unknown unary function");
}

Tensor apply_elementwise(const Tensor& a, const Tensor& b, BinaryFn fn) {
  switch (fn) {
    case BinaryFn::add: return add(a, b);
    case BinaryFn::sub: return sub(a, b);
    case BinaryFn::mul: return mul(a, b);
    case BinaryFn::div: return div(a, b);
  }
  throw Error("unknown binary function");
}

// --------------------------------------------------------------- binary ops

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_dtype(a, b, "add");
  Tensor out = binary_kernel(a, b, [](auto x, auto y) { return x + y; });
  check_output("add", out, {&a, &b});
  if (should_record({&a, &b}))
    record("add", {a, b}, out, [sa = a.shape(), sb = b.shape()](const Tensor& g) {
      return std::vector<Tensor>{sum_to(g, sa), sum_to(g, sb)};
    });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_dtype(a, b, "sub");
  Tensor out = binary_kernel(a, b, [](auto x, auto y) { return x - y; });
  check_output("sub", out, {&a, &b});
  if (should_record({&a, &b}))
    record("sub", {a, b}, out, [sa = a.shape(), sb = b.shape()](const Tensor& g) {
      return std::vector<Tensor>{sum_to(g, sa), sum_to(neg(g), sb)};
    });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_dtype(a, b, "mul");
  Tensor out = binary_kernel(a, b, [](auto x, auto y) { return x * y; });
  check_output("mul", out, {&a, &b});
  if (should_record({&a, &b}))
    record("mul", {a, b}, out, [a, b](const Tensor& g) {
      std::vector<Tensor> r(2);
      if (a.requires_grad()) r[0] = sum_to(mul(g, b), a.shape());
      if (b.requires_grad()) r[1] = sum_to(mul(g, a), b.shape());
      return r;
    });
  return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_dtype(a, b, "div");
  Tensor out = binary_kernel(a, b, [](auto x, auto y) { return x / y; });
  check_output("div", out, {&a, &b});
  if (should_record({&a, &b}))
    record("div", {a, b}, out, [a, b](const Tensor& g) {
      std::vector<Tensor> r(2);
      if (a.requires_grad()) r[0] = sum_to(div(g, b), a.shape());
      if (b.requires_grad()) r[1] = sum_to(neg(div(mul(g, a), mul(b, b))), b.shape());
      return r;
    });
  return out;
}

Tensor add(const Tensor& a, double c) {
  Tensor out = map_unary(a, [c](auto v) { return v + static_cast<decltype(v)>(c); });
  check_output("add_scalar", out, {&a});
  if (should_record({&a}))
    record("add_scalar", {a}, out, [](const Tensor& g) { return std::vector<Tensor>{g}; });
  return out;
}

Tensor mul(const Tensor& a, double c) {
  Tensor out = map_unary(a, [c](auto v) { return v * static_cast<decltype(v)>(c); });
  check_output("mul_scalar", out, {&a});
  if (should_record({&a}))
    record("mul_scalar", {a}, out, [c](const Tensor& g) { return std::vector<Tensor>{mul(g, c)}; });
  return out;
}

// --------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  Tensor out = Tensor::zeros({1}, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    T acc = 0;
    for (T v : x.data<T>()) acc += v;
    out.data<T>()[0] = acc;
  });
  check_output("sum", out, {&x});
  if (should_record({&x}))
    record("sum", {x}, out,
           [s = x.shape()](const Tensor& g) { return std::vector<Tensor>{expand(g, s)}; });
  return out;
}

Tensor sum(const Tensor& x, std::vector<int> axes, bool keepdim) {
  const int r = x.rank();
  std::vector<bool> reduce(r, false);
  for (int& a : axes) {
    a = norm_axis(a, r);
    reduce[a] = true;
  }
  Shape keep_shape = x.shape();
  Shape out_shape;
  for (int i = 0; i < r; ++i) {
    if (reduce[i]) keep_shape[i] = 1;
    if (!reduce[i] || keepdim) out_shape.push_back(keep_shape[i]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor out = Tensor::zeros(keep_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    // Output strides aligned to the input, zero on reduced axes.
    auto ost = strides_of(keep_shape);
    for (int i = 0; i < r; ++i)
      if (reduce[i]) ost[i] = 0;
    std::vector<std::int64_t> ist = strides_of(x.shape());
    broadcast_loop(x.shape(), ost, ist,
                   [&](std::int64_t, std::int64_t oo, std::int64_t oi, std::int64_t inner,
                       std::int64_t so, std::int64_t si) {
                     if (so == 0) {
                       T acc = po[oo];
                       for (std::int64_t k = 0; k < inner; ++k) acc += px[oi + k * si];
                       po[oo] = acc;
                     } else {
                       for (std::int64_t k = 0; k < inner; ++k) po[oo + k * so] += px[oi + k * si];
                     }
                   });
  });
  out = out.alias(out_shape);
  check_output("sum_axes", out, {&x});
  if (should_record({&x}))
    record("sum_axes", {x}, out, [keep_shape, s = x.shape()](const Tensor& g) {
      return std::vector<Tensor>{expand(reshape(g, keep_shape), s)};
    });
  return out;
}

Tensor mean(const Tensor& x) { return mul(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean(const Tensor& x, std::vector<int> axes, bool keepdim) {
  std::int64_t count = 1;
  for (int a : axes) count *= x.size(a);
  return mul(sum(x, std::move(axes), keepdim), 1.0 / static_cast<double>(count));
}

Tensor sum_to(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  const int r = x.rank();
  const int lead = r - static_cast<int>(shape.size());
  if (lead < 0)
    throw ShapeError("sum_to: cannot reduce " + shape_str(x.shape()) + " to " + shape_str(shape));
  std::vector<int> axes;
  for (int i = 0; i < lead; ++i) axes.push_back(i);
  for (int i = 0; i < static_cast<int>(shape.size()); ++i) {
    const auto e = x.shape()[lead + i];
    if (shape[i] == 1 && e != 1)
      axes.push_back(lead + i);
    else if (shape[i] != e)
      throw ShapeError("sum_to: cannot reduce " + shape_str(x.shape()) + " to " +
                       shape_str(shape));
  }
  return reshape(sum(x, axes, true), shape);
}

Tensor expand(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  if (broadcast_shapes(x.shape(), shape) != shape)
    throw ShapeError("cannot expand " + shape_str(x.shape()) + " to " + shape_str(shape));
  Tensor out = Tensor::zeros(shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    const auto sx = aligned_strides(x.shape(), shape);
    const auto so = strides_of(shape);
    broadcast_loop(shape, sx, so,
                   [&](std::int64_t, std::int64_t ox, std::int64_t oo, std::int64_t inner,
                       std::int64_t ix, std::int64_t) {
                     for (std::int64_t k = 0; k < inner; ++k) po[oo + k] = px[ox + k * ix];
                   });
  });
  if (should_record({&x}))
    record("expand", {x}, out,
           [s = x.shape()](const Tensor& g) { return std::vector<Tensor>{sum_to(g, s)}; });
  return out;
}

// ---------------------------------------------------------------- shape ops

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw ShapeError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  Tensor out = x.alias(std::move(shape));
  if (should_record({&x}))
    record("reshape", {x}, out,
           [s = x.shape()](const Tensor& g) { return std::vector<Tensor>{reshape(g, s)}; });
  return out;
}

Tensor permute(const Tensor& x, std::vector<int> perm) {
  const int r = x.rank();
  if (static_cast<int>(perm.size()) != r) throw ShapeError("permute: rank mismatch");
  std::vector<int> inv(r, -1);
  for (int i = 0; i < r; ++i) {
    perm[i] = norm_axis(perm[i], r);
    if (inv[perm[i]] != -1) throw ShapeError("permute: repeated axis");
    inv[perm[i]] = i;
  }
  Shape out_shape(r);
  for (int i = 0; i < r; ++i) out_shape[i] = x.shape()[perm[i]];
  Tensor out = Tensor::zeros(out_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    const auto ist = strides_of(x.shape());
    std::vector<std::int64_t> src(r);
    for (int i = 0; i < r; ++i) src[i] = ist[perm[i]];
    const auto ost = strides_of(out_shape);
    broadcast_loop(out_shape, src, ost,
                   [&](std::int64_t, std::int64_t oi, std::int64_t oo, std::int64_t inner,
                       std::int64_t si, std::int64_t) {
                     for (std::int64_t k = 0; k < inner; ++k) po[oo + k] = px[oi + k * si];
                   });
  });
  if (should_record({&x}))
    record("permute", {x}, out,
           [inv](const Tensor& g) { return std::vector<Tensor>{permute(g, inv)}; });
  return out;
}

Tensor concat(std::initializer_list<Tensor> parts, int axis) {
  std::vector<Tensor> v(parts);
  return concat(std::span<const Tensor>(v), axis);
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const int r = parts[0].rank();
  axis = norm_axis(axis, r);
  Shape out_shape = parts[0].shape();
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    require_same_dtype(parts[0], p, "concat");
    if (p.rank() != r) throw ShapeError("concat: rank mismatch");
    for (int i = 0; i < r; ++i)
      if (i != axis && p.shape()[i] != parts[0].shape()[i])
        throw ShapeError("concat: shape mismatch " + shape_str(p.shape()) + " vs " +
                         shape_str(parts[0].shape()));
    out_shape[axis] += p.shape()[axis];
  }
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= out_shape[i];
  for (int i = axis + 1; i < r; ++i) inner *= out_shape[i];
  Tensor out = Tensor::zeros(out_shape, parts[0].dtype());
  dispatch(out.dtype(), [&](auto tag) {
    using T = decltype(tag);
    T* po = out.data<T>().data();
    const std::int64_t row = out_shape[axis] * inner;
    std::int64_t offset = 0;
    for (const Tensor& p : parts) {
      const T* pp = p.data<T>().data();
      const std::int64_t chunk = p.shape()[axis] * inner;
      for (std::int64_t o = 0; o < outer; ++o)
        std::copy_n(pp + o * chunk, chunk, po + o * row + offset);
      offset += chunk;
    }
  });
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  if (should_record(std::span<const Tensor>(inputs))) {
    std::vector<std::int64_t> extents;
    for (const Tensor& p : parts) extents.push_back(p.shape()[axis]);
    record("concat", inputs, out, [extents, axis](const Tensor& g) {
      std::vector<Tensor> r;
      std::int64_t start = 0;
      for (auto e : extents) {
        r.push_back(slice(g, axis, start, e));
        start += e;
      }
      return r;
    });
  }
  return out;
}

namespace {

// Writes `src` into a zero tensor of `full_shape` at [start, start+len) on axis.
Tensor embed_slice(const Tensor& src, const Shape& full_shape, int axis, std::int64_t start) {
  Tensor out = Tensor::zeros(full_shape, src.dtype());
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= full_shape[i];
  for (int i = axis + 1; i < static_cast<int>(full_shape.size()); ++i) inner *= full_shape[i];
  const std::int64_t len = src.shape()[axis];
  dispatch(src.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* ps = src.data<T>().data();
    T* po = out.data<T>().data();
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(ps + o * len * inner, len * inner,
                  po + o * full_shape[axis] * inner + start * inner);
  });
  if (should_record({&src}))
    record("embed_slice", {src}, out, [axis, start, len](const Tensor& g) {
      return std::vector<Tensor>{slice(g, axis, start, len)};
    });
  return out;
}

}  // namespace

Tensor slice(const Tensor& x, int axis, std::int64_t start, std::int64_t length) {
  axis = norm_axis(axis, x.rank());
  const Shape& s = x.shape();
  if (start < 0 || length <= 0 || start + length > s[axis])
    throw ShapeError("slice [" + std::to_string(start) + ", +" + std::to_string(length) +
                     ") out of range for axis " + std::to_string(axis) + " of " + shape_str(s));
  Shape out_shape = s;
  out_shape[axis] = length;
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (int i = axis + 1; i < x.rank(); ++i) inner *= s[i];
  Tensor out = Tensor::zeros(out_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(px + o * s[axis] * inner + start * inner, length * inner,
                  po + o * length * inner);
  });
  if (should_record({&x}))
    record("slice", {x}, out, [s, axis, start](const Tensor& g) {
      return std::vector<Tensor>{embed_slice(g, s, axis, start)};
    });
  return out;
}

// ------------------------------------------------------------------- matmul

Tensor matmul(const Tensor& a, const Tensor& b, bool ta, bool tb) {
  require_same_dtype(a, b, "matmul");
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul expects 2-D operands, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  const std::int64_t m = ta ? a.size(1) : a.size(0);
  const std::int64_t ka = ta ? a.size(0) : a.size(1);
  const std::int64_t kb = tb ? b.size(1) : b.size(0);
  const std::int64_t n = tb ? b.size(0) : b.size(1);
  if (ka != kb)
    throw ShapeError("matmul inner dimensions differ: " + shape_str(a.shape()) +
                     (ta ? "ᵀ" : "") + " · " + shape_str(b.shape()) + (tb ? "ᵀ" : ""));
  Tensor out = Tensor::zeros({m, n}, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    CMapMat<T> A(a.data<T>().data(), a.size(0), a.size(1), Eigen::OuterStride<>(a.size(1)));
    CMapMat<T> B(b.data<T>().data(), b.size(0), b.size(1), Eigen::OuterStride<>(b.size(1)));
    MapMat<T> C(out.data<T>().data(), m, n, Eigen::OuterStride<>(n));
    if (!ta && !tb)
      C.noalias() = A * B;
    else if (ta && !tb)
      C.noalias() = A.transpose() * B;
    else if (!ta && tb)
      C.noalias() = A * B.transpose();
    else
      C.noalias() = A.transpose() * B.transpose();
  });
  check_output("matmul", out, {&a, &b});
  if (should_record({&a, &b}))
    record("matmul", {a, b}, out, [a, b, ta, tb](const Tensor& g) {
      std::vector<Tensor> r(2);
      if (a.requires_grad()) r[0] = ta ? matmul(b, g, tb, true) : matmul(g, b, false, !tb);
      if (b.requires_grad()) r[1] = tb ? matmul(g, a, true, ta) : matmul(a, g, !ta, false);
      return r;
    });
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2) throw ShapeError("linear weight must be [out, in]");
  const std::int64_t in = weight.size(1);
  const std::int64_t outf = weight.size(0);
  if (x.size(-1) != in)
    throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  if (bias.defined() && (bias.rank() != 1 || bias.size(0) != outf))
    throw ShapeError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  Shape out_shape = x.shape();
  out_shape.back() = outf;
  Tensor y = matmul(reshape(x, {x.numel() / in, in}), weight, false, true);
  if (bias.defined()) y = add(y, bias);
  return reshape(y, out_shape);
}

// --------------------------------------------------------------- convolution

namespace {

struct ConvGeom {
  std::int64_t batch, channels, depth, height, width, plane;
  int taps_z, kernel;
};

ConvGeom conv_geom(const Shape& s, int dims, int kernel) {
  ConvGeom g{};
  g.batch = s[0];
  g.channels = s[1];
  g.depth = dims == 3 ? s[2] : 1;
  g.height = s[dims == 3 ? 3 : 2];
  g.width = s[dims == 3 ? 4 : 3];
  g.plane = g.depth * g.height * g.width;
  g.kernel = kernel;
  g.taps_z = dims == 3 ? kernel : 1;
  return g;
}

// Fills col[(c * taps + t), j] for output rows [row0, row1) of one sample,
// where a row is one (z, y) pair and j runs over row-major columns.
template <class T>
void im2col(const T* x, const ConvGeom& g, std::int64_t row0, std::int64_t row1, T* col) {
  const int k = g.kernel, r = k / 2;
  const std::int64_t ncols = (row1 - row0) * g.width;
  const int taps = g.taps_z * k * k;
  for (std::int64_t c = 0; c < g.channels; ++c) {
    const T* xc = x + c * g.plane;
    int t = 0;
    for (int dz = 0; dz < g.taps_z; ++dz)
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx, ++t) {
          T* dst = col + (c * taps + t) * ncols;
          for (std::int64_t q = row0; q < row1; ++q) {
            const std::int64_t z = q / g.height, y = q % g.height;
            const std::int64_t sz = g.taps_z > 1 ? z + dz - r : z;
            const std::int64_t sy = y + dy - r;
            T* drow = dst + (q - row0) * g.width;
            if (sz < 0 || sz >= g.depth || sy < 0 || sy >= g.height) {
              std::fill_n(drow, g.width, T(0));
              continue;
            }
            const T* srow = xc + (sz * g.height + sy) * g.width;
            const std::int64_t shift = dx - r;
            for (std::int64_t xo = 0; xo < g.width; ++xo) {
              const std::int64_t sx = xo + shift;
              drow[xo] = (sx >= 0 && sx < g.width) ? srow[sx] : T(0);
            }
          }
        }
  }
}

std::int64_t rows_per_chunk(const ConvGeom& g, int taps) {
  const std::int64_t budget = std::int64_t{1} << 21;
  const std::int64_t per_row = g.channels * taps * g.width;
  return std::max<std::int64_t>(1, budget / std::max<std::int64_t>(1, per_row));
}

void validate_conv(const Tensor& x, const Tensor& w, int dims) {
  if (dims != 2 && dims != 3) throw ShapeError("conv supports 2 or 3 spatial dims");
  if (x.rank() != dims + 2)
    throw ShapeError("conv input must be [B, C, spatial...], got " + shape_str(x.shape()));
  if (w.rank() != dims + 2) throw ShapeError("conv kernel rank mismatch " + shape_str(w.shape()));
  const auto k = w.size(2);
  for (int i = 2; i < dims + 2; ++i)
    if (w.size(i) != k) throw ShapeError("conv kernel must be cubic/square " + shape_str(w.shape()));
  if (k % 2 == 0) throw ShapeError("conv kernel extent must be odd, got " + std::to_string(k));
  if (w.size(1) != x.size(1))
    throw ShapeError("conv channel mismatch: input " + shape_str(x.shape()) + " kernel " +
                     shape_str(w.shape()));
  require_same_dtype(x, w, "conv");
}

}  // namespace

Tensor conv(const Tensor& x, const Tensor& w, int dims) {
  validate_conv(x, w, dims);
  const int k = static_cast<int>(w.size(2));
  const ConvGeom g = conv_geom(x.shape(), dims, k);
  const std::int64_t outc = w.size(0);
  Shape out_shape = x.shape();
  out_shape[1] = outc;
  Tensor out = Tensor::zeros(out_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    const int taps = g.taps_z * k * k;
    const std::int64_t kk = g.channels * taps;
    CMapMat<T> W(w.data<T>().data(), outc, kk, Eigen::OuterStride<>(kk));
    if (k == 1) {
      // Channel-outer accumulation: every pixel sums its channels in the same
      // order, so the result is exactly equivariant to pixel permutations.
      const T* pw = w.data<T>().data();
      for (std::int64_t b = 0; b < g.batch; ++b) {
        const T* xb = px + b * g.channels * g.plane;
        T* yb = po + b * outc * g.plane;
        for (std::int64_t o = 0; o < outc; ++o) {
          T* yo = yb + o * g.plane;
          for (std::int64_t c = 0; c < g.channels; ++c) {
            const T wc = pw[o * g.channels + c];
            const T* xc = xb + c * g.plane;
            for (std::int64_t p = 0; p < g.plane; ++p) yo[p] += wc * xc[p];
          }
        }
      }
      return;
    }
    const std::int64_t rows = g.depth * g.height;
    const std::int64_t chunk = rows_per_chunk(g, taps);
    std::vector<T> col(static_cast<std::size_t>(kk * std::min(chunk, rows) * g.width));
    for (std::int64_t b = 0; b < g.batch; ++b) {
      const T* xb = px + b * g.channels * g.plane;
      T* yb = po + b * outc * g.plane;
      for (std::int64_t r0 = 0; r0 < rows; r0 += chunk) {
        const std::int64_t r1 = std::min(rows, r0 + chunk);
        const std::int64_t ncols = (r1 - r0) * g.width;
        im2col(xb, g, r0, r1, col.data());
        CMapMat<T> C(col.data(), kk, ncols, Eigen::OuterStride<>(ncols));
        MapMat<T> Y(yb + r0 * g.width, outc, ncols, Eigen::OuterStride<>(g.plane));
        Y.noalias() = W * C;
      }
    }
  });
  check_output("conv", out, {&x, &w});
  if (should_record({&x, &w}))
    record("conv", {x, w}, out, [x, w, dims, k](const Tensor& g) {
      std::vector<Tensor> r(2);
      if (x.requires_grad()) r[0] = conv(g, flip_transpose_kernel(w, dims), dims);
      if (w.requires_grad()) r[1] = conv_weight_grad(x, g, dims, k);
      return r;
    });
  return out;
}

Tensor conv_weight_grad(const Tensor& x, const Tensor& grad_out, int dims, int kernel) {
  require_same_dtype(x, grad_out, "conv_weight_grad");
  if (kernel % 2 == 0) throw ShapeError("conv kernel extent must be odd");
  const ConvGeom g = conv_geom(x.shape(), dims, kernel);
  const std::int64_t outc = grad_out.size(1);
  Shape wshape{outc, g.channels};
  for (int i = 0; i < dims; ++i) wshape.push_back(kernel);
  Tensor out = Tensor::zeros(wshape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    const T* pg = grad_out.data<T>().data();
    const int taps = g.taps_z * kernel * kernel;
    const std::int64_t kk = g.channels * taps;
    MapMat<T> W(out.data<T>().data(), outc, kk, Eigen::OuterStride<>(kk));
    if (kernel == 1) {
      for (std::int64_t b = 0; b < g.batch; ++b) {
        CMapMat<T> X(px + b * g.channels * g.plane, g.channels, g.plane,
                     Eigen::OuterStride<>(g.plane));
        CMapMat<T> G(pg + b * outc * g.plane, outc, g.plane, Eigen::OuterStride<>(g.plane));
        W.noalias() += G * X.transpose();
      }
      return;
    }
    const std::int64_t rows = g.depth * g.height;
    const std::int64_t chunk = rows_per_chunk(g, taps);
    std::vector<T> col(static_cast<std::size_t>(kk * std::min(chunk, rows) * g.width));
    for (std::int64_t b = 0; b < g.batch; ++b) {
      const T* xb = px + b * g.channels * g.plane;
      const T* gb = pg + b * outc * g.plane;
      for (std::int64_t r0 = 0; r0 < rows; r0 += chunk) {
        const std::int64_t r1 = std::min(rows, r0 + chunk);
        const std::int64_t ncols = (r1 - r0) * g.width;
        im2col(xb, g, r0, r1, col.data());
        CMapMat<T> C(col.data(), kk, ncols, Eigen::OuterStride<>(ncols));
        CMapMat<T> G(gb + r0 * g.width, outc, ncols, Eigen::OuterStride<>(g.plane));
        W.noalias() += G * C.transpose();
      }
    }
  });
  check_output("conv_weight_grad", out, {&x, &grad_out});
  if (should_record({&x, &grad_out}))
    record("conv_weight_grad", {x, grad_out}, out,
           [x, grad_out, dims](const Tensor& gw) {
             std::vector<Tensor> r(2);
             if (x.requires_grad()) r[0] = conv(grad_out, flip_transpose_kernel(gw, dims), dims);
             if (grad_out.requires_grad()) r[1] = conv(x, gw, dims);
             return r;
           });
  return out;
}

Tensor flip_transpose_kernel(const Tensor& w, int dims) {
  const std::int64_t o = w.size(0), c = w.size(1);
  const std::int64_t taps = w.numel() / (o * c);
  Shape out_shape = w.shape();
  std::swap(out_shape[0], out_shape[1]);
  Tensor out = Tensor::zeros(out_shape, w.dtype());
  dispatch(w.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* pw = w.data<T>().data();
    T* po = out.data<T>().data();
    for (std::int64_t i = 0; i < o; ++i)
      for (std::int64_t j = 0; j < c; ++j)
        for (std::int64_t t = 0; t < taps; ++t)
          po[(j * o + i) * taps + (taps - 1 - t)] = pw[(i * c + j) * taps + t];
  });
  if (should_record({&w}))
    record("flip_transpose_kernel", {w}, out, [dims](const Tensor& g) {
      return std::vector<Tensor>{flip_transpose_kernel(g, dims)};
    });
  return out;
}

// -------------------------------------------------------------- resampling

namespace {

struct SpatialGeom {
  std::int64_t lead, d, h, w;
};

SpatialGeom spatial_geom(const Shape& s, int dims) {
  if (dims != 2 && dims != 3) throw ShapeError("resampling supports 2 or 3 spatial dims");
  if (static_cast<int>(s.size()) < dims)
    throw ShapeError("tensor " + shape_str(s) + " has fewer than " + std::to_string(dims) +
                     " axes");
  const int r = static_cast<int>(s.size());
  SpatialGeom g{};
  g.w = s[r - 1];
  g.h = s[r - 2];
  g.d = dims == 3 ? s[r - 3] : 1;
  g.lead = shape_numel(s) / (g.w * g.h * g.d);
  return g;
}

}  // namespace

Tensor upsample_nearest(const Tensor& x, int scale, int dims) {
  if (scale != 1 && scale != 2) throw ShapeError("upsample scale must be 1 or 2");
  if (scale == 1) return x;
  const SpatialGeom g = spatial_geom(x.shape(), dims);
  Shape out_shape = x.shape();
  for (int i = 0; i < dims; ++i) out_shape[out_shape.size() - 1 - i] *= scale;
  Tensor out = Tensor::zeros(out_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    const std::int64_t sd = dims == 3 ? scale : 1;
    const std::int64_t od = g.d * sd, oh = g.h * scale, ow = g.w * scale;
    for (std::int64_t n = 0; n < g.lead; ++n)
      for (std::int64_t z = 0; z < od; ++z)
        for (std::int64_t y = 0; y < oh; ++y) {
          const T* src = px + ((n * g.d + z / sd) * g.h + y / scale) * g.w;
          T* dst = po + ((n * od + z) * oh + y) * ow;
          for (std::int64_t xo = 0; xo < ow; ++xo) dst[xo] = src[xo / scale];
        }
  });
  if (should_record({&x}))
    record("upsample_nearest", {x}, out, [scale, dims](const Tensor& g) {
      return std::vector<Tensor>{downsample_sum(g, scale, dims)};
    });
  return out;
}

Tensor downsample_sum(const Tensor& x, int scale, int dims) {
  if (scale == 1) return x;
  const SpatialGeom g = spatial_geom(x.shape(), dims);
  const std::int64_t sd = dims == 3 ? scale : 1;
  if (g.w % scale || g.h % scale || g.d % sd)
    throw ShapeError("downsample: extents of " + shape_str(x.shape()) + " not divisible by " +
                     std::to_string(scale));
  Shape out_shape = x.shape();
  for (int i = 0; i < dims; ++i) out_shape[out_shape.size() - 1 - i] /= scale;
  Tensor out = Tensor::zeros(out_shape, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    const std::int64_t od = g.d / sd, oh = g.h / scale, ow = g.w / scale;
    for (std::int64_t n = 0; n < g.lead; ++n)
      for (std::int64_t z = 0; z < g.d; ++z)
        for (std::int64_t y = 0; y < g.h; ++y) {
          const T* src = px + ((n * g.d + z) * g.h + y) * g.w;
          T* dst = po + ((n * od + z / sd) * oh + y / scale) * ow;
          for (std::int64_t xi = 0; xi < g.w; ++xi) dst[xi / scale] += src[xi];
        }
  });
  if (should_record({&x}))
    record("downsample_sum", {x}, out, [scale, dims](const Tensor& g) {
      return std::vector<Tensor>{upsample_nearest(g, scale, dims)};
    });
  return out;
}

Tensor avg_pool(const Tensor& x, int scale, int dims) {
  if (scale == 1) return x;
  return mul(downsample_sum(x, scale, dims), 1.0 / std::pow(static_cast<double>(scale), dims));
}

// ---------------------------------------------------------------- trilinear

namespace {

struct Corner8 {
  std::int64_t offset[8];
  double weight[8];
};

// Continuous voxel index along an axis of n cells for world coordinate u in
// [-1, 1]; centres sit at -1 + (2i + 1) / n and queries clamp to the outermost
// centres.
inline void axis_lerp(double u, std::int64_t n, std::int64_t& i0, std::int64_t& i1, double& t) {
  double c = (u + 1.0) * 0.5 * static_cast<double>(n) - 0.5;
  if (!(c > 0.0)) c = 0.0;  // also maps NaN to the border
  const double hi = static_cast<double>(n - 1);
  if (c > hi) c = hi;
  if (n == 1) {
    i0 = i1 = 0;
    t = 0.0;
    return;
  }
  i0 = std::min<std::int64_t>(static_cast<std::int64_t>(c), n - 2);
  i1 = i0 + 1;
  t = c - static_cast<double>(i0);
}

std::vector<Corner8> corner_table(const std::vector<double>& pts, std::int64_t count,
                                  std::int64_t d, std::int64_t h, std::int64_t w) {
  std::vector<Corner8> table(static_cast<std::size_t>(count));
  for (std::int64_t p = 0; p < count; ++p) {
    std::int64_t x0, x1, y0, y1, z0, z1;
    double tx, ty, tz;
    axis_lerp(pts[3 * p + 0], w, x0, x1, tx);
    axis_lerp(pts[3 * p + 1], h, y0, y1, ty);
    axis_lerp(pts[3 * p + 2], d, z0, z1, tz);
    Corner8& c = table[static_cast<std::size_t>(p)];
    int k = 0;
    for (int cz = 0; cz < 2; ++cz)
      for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx, ++k) {
          const std::int64_t zi = cz ? z1 : z0, yi = cy ? y1 : y0, xi = cx ? x1 : x0;
          c.offset[k] = (zi * h + yi) * w + xi;
          c.weight[k] = (cz ? tz : 1.0 - tz) * (cy ? ty : 1.0 - ty) * (cx ? tx : 1.0 - tx);
        }
  }
  return table;
}

}  // namespace

Tensor trilinear_sample(const Tensor& volume, std::shared_ptr<const std::vector<double>> points,
                        std::int64_t num_points) {
  if (volume.rank() != 5) throw ShapeError("trilinear_sample expects V as [B, C, D, H, W]");
  const std::int64_t B = volume.size(0), C = volume.size(1);
  const std::int64_t D = volume.size(2), H = volume.size(3), W = volume.size(4);
  if (static_cast<std::int64_t>(points->size()) != B * num_points * 3)
    throw ShapeError("trilinear_sample: expected " + std::to_string(B * num_points * 3) +
                     " coordinates, got " + std::to_string(points->size()));
  Tensor out = Tensor::zeros({B, num_points, C}, volume.dtype());
  const std::int64_t plane = D * H * W;
  dispatch(volume.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* pv = volume.data<T>().data();
    T* po = out.data<T>().data();
    for (std::int64_t b = 0; b < B; ++b) {
      std::vector<double> local(points->begin() + b * num_points * 3,
                                points->begin() + (b + 1) * num_points * 3);
      const auto table = corner_table(local, num_points, D, H, W);
      const T* vb = pv + b * C * plane;
      for (std::int64_t p = 0; p < num_points; ++p) {
        const Corner8& cn = table[static_cast<std::size_t>(p)];
        T* dst = po + (b * num_points + p) * C;
        for (std::int64_t c = 0; c < C; ++c) {
          const T* vc = vb + c * plane;
          T acc = 0;
          for (int k = 0; k < 8; ++k) acc += static_cast<T>(cn.weight[k]) * vc[cn.offset[k]];
          dst[c] = acc;
        }
      }
    }
  });
  if (should_record({&volume}))
    record("trilinear_sample", {volume}, out, [points, s = volume.shape()](const Tensor& g) {
      return std::vector<Tensor>{trilinear_splat(g, points, s)};
    });
  return out;
}

Tensor trilinear_splat(const Tensor& values, std::shared_ptr<const std::vector<double>> points,
                       const Shape& volume_shape) {
  const std::int64_t B = volume_shape[0], C = volume_shape[1];
  const std::int64_t D = volume_shape[2], H = volume_shape[3], W = volume_shape[4];
  const std::int64_t P = values.size(1);
  if (values.rank() != 3 || values.size(0) != B || values.size(2) != C)
    throw ShapeError("trilinear_splat: values " + shape_str(values.shape()) +
                     " incompatible with volume " + shape_str(volume_shape));
  Tensor out = Tensor::zeros(volume_shape, values.dtype());
  const std::int64_t plane = D * H * W;
  dispatch(values.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* pv = values.data<T>().data();
    T* po = out.data<T>().data();
    for (std::int64_t b = 0; b < B; ++b) {
      std::vector<double> local(points->begin() + b * P * 3, points->begin() + (b + 1) * P * 3);
      const auto table = corner_table(local, P, D, H, W);
      T* vb = po + b * C * plane;
      for (std::int64_t p = 0; p < P; ++p) {
        const Corner8& cn = table[static_cast<std::size_t>(p)];
        const T* src = pv + (b * P + p) * C;
        for (std::int64_t c = 0; c < C; ++c) {
          T* vc = vb + c * plane;
          for (int k = 0; k < 8; ++k) vc[cn.offset[k]] += static_cast<T>(cn.weight[k]) * src[c];
        }
      }
    }
  });
  if (should_record({&values}))
    record("trilinear_splat", {values}, out, [points, P](const Tensor& g) {
      return std::vector<Tensor>{trilinear_sample(g, points, P)};
    });
  return out;
}

// ------------------------------------------------------------------- cumsum

Tensor cumsum(const Tensor& x, int axis, bool exclusive, bool reverse) {
  axis = norm_axis(axis, x.rank());
  const Shape& s = x.shape();
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (int i = axis + 1; i < x.rank(); ++i) inner *= s[i];
  const std::int64_t n = s[axis];
  Tensor out = Tensor::zeros(s, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* px = x.data<T>().data();
    T* po = out.data<T>().data();
    std::vector<T> acc(static_cast<std::size_t>(inner));
    for (std::int64_t o = 0; o < outer; ++o) {
      std::fill(acc.begin(), acc.end(), T(0));
      for (std::int64_t step = 0; step < n; ++step) {
        const std::int64_t k = reverse ? n - 1 - step : step;
        const T* src = px + (o * n + k) * inner;
        T* dst = po + (o * n + k) * inner;
        for (std::int64_t i = 0; i < inner; ++i) {
          if (exclusive) {
            dst[i] = acc[i];
            acc[i] += src[i];
          } else {
            acc[i] += src[i];
            dst[i] = acc[i];
          }
        }
      }
    }
  });
  check_output("cumsum", out, {&x});
  if (should_record({&x}))
    record("cumsum", {x}, out, [axis, exclusive, reverse](const Tensor& g) {
      return std::vector<Tensor>{cumsum(g, axis, exclusive, !reverse)};
    });
  return out;
}

// ------------------------------------------------------------- constructors

Tensor randn(const Shape& shape, Rng& rng, double stddev, DType dtype) {
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& e : v) e = rng.normal() * stddev;
  return Tensor::from(v, shape, dtype);
}

Tensor rand_uniform(const Shape& shape, Rng& rng, double lo, double hi, DType dtype) {
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& e : v) e = rng.uniform(lo, hi);
  return Tensor::from(v, shape, dtype);
}

}  // namespace vgan
