// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace vgan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

const char* dtype_name(DType dtype);
std::size_t dtype_size(DType dtype);

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Calls `fn(T{})` with T = float or double according to `dtype`.
template <class Fn>
decltype(auto) dispatch(DType dtype, Fn&& fn) {
  if (dtype == DType::f32) return fn(float{});
  return fn(double{});
}

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() {
  return DType::f32;
}
template <>
constexpr DType dtype_of<double>() {
  return DType::f64;
}

namespace detail {

struct Storage {
  std::vector<float> f32;
  std::vector<double> f64;
};

struct TensorImpl {
  Shape shape;
  DType dtype = DType::f32;
  std::shared_ptr<Storage> storage;
  std::uint64_t id = 0;
  bool requires_grad = false;
  bool leaf = true;
  std::shared_ptr<TensorImpl> grad;
};

std::uint64_t next_tensor_id();

}  // namespace detail

/// N-dimensional row-major array with value-shared storage. Copies of a
/// Tensor alias the same buffer; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, DType dtype = DType::f32);
  static Tensor ones(Shape shape, DType dtype = DType::f32);
  static Tensor full(Shape shape, double value, DType dtype = DType::f32);
  static Tensor scalar(double value, DType dtype = DType::f32);
  static Tensor from(std::span<const double> values, Shape shape,
                     DType dtype = DType::f32);
  static Tensor adopt(std::vector<float> values, Shape shape);
  static Tensor adopt(std::vector<double> values, Shape shape);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  std::int64_t size(int axis) const;
  std::int64_t numel() const;
  DType dtype() const;

  template <class T>
  std::span<T> data() {
    return std::span<T>(storage_for<T>());
  }
  template <class T>
  std::span<const T> data() const {
    return std::span<const T>(const_cast<Tensor*>(this)->storage_for<T>());
  }

  double item() const;
  double flat(std::int64_t index) const;
  void set_flat(std::int64_t index, double value);
  std::vector<double> values() const;

  bool requires_grad() const;
  /// Marks a leaf as trainable. Only valid on leaves.
  Tensor& requires_grad_(bool on = true);
  bool is_leaf() const;

  Tensor grad() const;
  void set_grad(const Tensor& g);
  void zero_grad();

  /// Same storage, cut from the differentiation graph.
  Tensor detach() const;
  Tensor clone() const;
  Tensor to(DType dtype) const;
  /// Detached view of the same buffer under another shape of equal size.
  Tensor alias(Shape shape) const;

  std::uint64_t id() const;
  bool same(const Tensor& other) const { return impl_ == other.impl_; }

  /// Marks this tensor as the output of a recorded op. Used by the op layer.
  void mark_recorded();

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  static Tensor make(Shape shape, DType dtype);
  void require_dtype(DType dtype) const;

  template <class T>
  std::vector<T>& storage_for() {
    require_dtype(dtype_of<T>());
    if constexpr (std::is_same_v<T, float>)
      return impl_->storage->f32;
    else
      return impl_->storage->f64;
  }

  std::shared_ptr<detail::TensorImpl> impl_;
};

bool all_finite(const Tensor& t);
bool bit_equal(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace vgan
