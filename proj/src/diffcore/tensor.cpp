// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/diffcore/tensor.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>

namespace vgan {

const char* dtype_name(DType dtype) {
  return dtype == DType::f32 ? "f32" : "f64";
}

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 8; }

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {
std::uint64_t next_tensor_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

Tensor Tensor::make(Shape shape, DType dtype) {
  for (auto e : shape) {
    if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->storage = std::make_shared<detail::Storage>();
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  if (dtype == DType::f32)
    impl->storage->f32.assign(n, 0.0f);
  else
    impl->storage->f64.assign(n, 0.0);
  impl->shape = std::move(shape);
  impl->dtype = dtype;
  impl->id = detail::next_tensor_id();
  return Tensor(std::move(impl));
}

Tensor Tensor::zeros(Shape shape, DType dtype) { return make(std::move(shape), dtype); }

Tensor Tensor::ones(Shape shape, DType dtype) { return full(std::move(shape), 1.0, dtype); }

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  Tensor t = make(std::move(shape), dtype);
  dispatch(dtype, [&](auto tag) {
    using T = decltype(tag);
    for (auto& v : t.data<T>()) v = static_cast<T>(value);
  });
  return t;
}

Tensor Tensor::scalar(double value, DType dtype) { return full({1}, value, dtype); }

Tensor Tensor::from(std::span<const double> values, Shape shape, DType dtype) {
  if (static_cast<std::int64_t>(values.size()) != shape_numel(shape))
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  Tensor t = make(std::move(shape), dtype);
  dispatch(dtype, [&](auto tag) {
    using T = decltype(tag);
    auto d = t.data<T>();
    for (std::size_t i = 0; i < values.size(); ++i) d[i] = static_cast<T>(values[i]);
  });
  return t;
}

Tensor Tensor::adopt(std::vector<float> values, Shape shape) {
  if (static_cast<std::int64_t>(values.size()) != shape_numel(shape))
    throw ShapeError("value count does not match shape " + shape_str(shape));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->storage = std::make_shared<detail::Storage>();
  impl->storage->f32 = std::move(values);
  impl->shape = std::move(shape);
  impl->dtype = DType::f32;
  impl->id = detail::next_tensor_id();
  return Tensor(std::move(impl));
}

Tensor Tensor::adopt(std::vector<double> values, Shape shape) {
  if (static_cast<std::int64_t>(values.size()) != shape_numel(shape))
    throw ShapeError("value count does not match shape " + shape_str(shape));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->storage = std::make_shared<detail::Storage>();
  impl->storage->f64 = std::move(values);
  impl->shape = std::move(shape);
  impl->dtype = DType::f64;
  impl->id = detail::next_tensor_id();
  return Tensor(std::move(impl));
}

const Shape& Tensor::shape() const {
  if (!impl_) throw Error("use of undefined tensor");
  return impl_->shape;
}

std::int64_t Tensor::size(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r)
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  return shape()[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::numel() const { return shape_numel(shape()); }

DType Tensor::dtype() const {
  if (!impl_) throw Error("use of undefined tensor");
  return impl_->dtype;
}

void Tensor::require_dtype(DType want) const {
  if (dtype() != want) throw Error(std::string("tensor is not ") + dtype_name(want));
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return flat(0);
}

double Tensor::flat(std::int64_t index) const {
  return dispatch(dtype(), [&](auto tag) -> double {
    using T = decltype(tag);
    return static_cast<double>(data<T>()[static_cast<std::size_t>(index)]);
  });
}

void Tensor::set_flat(std::int64_t index, double value) {
  dispatch(dtype(), [&](auto tag) {
    using T = decltype(tag);
    data<T>()[static_cast<std::size_t>(index)] = static_cast<T>(value);
  });
}

std::vector<double> Tensor::values() const {
  return dispatch(dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto d = data<T>();
    return std::vector<double>(d.begin(), d.end());
  });
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::requires_grad_(bool on) {
  if (!impl_) throw Error("use of undefined tensor");
  if (!impl_->leaf) throw Error("requires_grad_ on a non-leaf tensor");
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return !impl_ || impl_->leaf; }

Tensor Tensor::grad() const {
  if (!impl_ || !impl_->grad) return {};
  return Tensor(impl_->grad);
}

void Tensor::set_grad(const Tensor& g) {
  if (!impl_) throw Error("use of undefined tensor");
  if (g.defined() && g.shape() != shape())
    throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match " +
                     shape_str(shape()));
  impl_->grad = g.impl_;
}

void Tensor::zero_grad() {
  if (impl_) impl_->grad.reset();
}

Tensor Tensor::detach() const {
  if (!impl_) return {};
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->storage = impl_->storage;
  impl->id = detail::next_tensor_id();
  return Tensor(std::move(impl));
}

Tensor Tensor::clone() const {
  if (!impl_) return {};
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->storage = std::make_shared<detail::Storage>(*impl_->storage);
  impl->id = detail::next_tensor_id();
  return Tensor(std::move(impl));
}

Tensor Tensor::to(DType target) const {
  if (dtype() == target) return clone();
  if (target == DType::f32) {
    const auto& src = impl_->storage->f64;
    return adopt(std::vector<float>(src.begin(), src.end()), shape());
  }
  const auto& src = impl_->storage->f32;
  return adopt(std::vector<double>(src.begin(), src.end()), shape());
}

Tensor Tensor::alias(Shape new_shape) const {
  if (shape_numel(new_shape) != numel())
    throw ShapeError("cannot view " + shape_str(shape()) + " as " + shape_str(new_shape));
  Tensor t = detach();
  t.impl_->shape = std::move(new_shape);
  return t;
}

std::uint64_t Tensor::id() const {
  if (!impl_) throw Error("use of undefined tensor");
  return impl_->id;
}

void Tensor::mark_recorded() {
  impl_->requires_grad = true;
  impl_->leaf = false;
}

bool all_finite(const Tensor& t) {
  return dispatch(t.dtype(), [&](auto tag) {
    using T = decltype(tag);
    for (T v : t.data<T>())
      if (!std::isfinite(v)) return false;
    return true;
  });
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.dtype() != b.dtype() || a.shape() != b.shape()) return false;
  return dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto x = a.data<T>();
    auto y = b.data<T>();
    return std::memcmp(x.data(), y.data(), x.size() * sizeof(T)) == 0;
  });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("max_abs_diff shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.flat(i) - b.flat(i)));
  return m;
}

}  // namespace vgan
