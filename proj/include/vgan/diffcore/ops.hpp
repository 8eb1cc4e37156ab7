// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

enum class UnaryFn { sin, cos, exp, log, neg, leaky_relu, softplus, sigmoid, tanh };
enum class BinaryFn { add, sub, mul, div };

/// Elementwise map. `param` is the slope for leaky_relu and ignored otherwise.
Tensor apply_elementwise(const Tensor& x, UnaryFn fn, double param = 0.2);
/// Broadcasting binary map (trailing-dimension alignment, extent-1 stretch).
Tensor apply_elementwise(const Tensor& a, const Tensor& b, BinaryFn fn);

Shape broadcast_shapes(const Shape& a, const Shape& b);

inline constexpr double kLeakySlope = 0.2;

Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor neg(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope);
/// Overflow-safe log(1 + e^x).
Tensor softplus(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor pow(const Tensor& x, double exponent);
Tensor square(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor mul(const Tensor& a, double b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, double b) { return add(a, -b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, b); }
inline Tensor operator*(double a, const Tensor& b) { return mul(b, a); }

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::vector<int> axes, bool keepdim = false);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::vector<int> axes, bool keepdim = false);
/// Sums broadcast dimensions away so the result has `shape`.
Tensor sum_to(const Tensor& x, const Shape& shape);
/// Broadcasts `x` to `shape` (materialized).
Tensor expand(const Tensor& x, const Shape& shape);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, std::vector<int> perm);
Tensor concat(std::span<const Tensor> parts, int axis);
Tensor concat(std::initializer_list<Tensor> parts, int axis);
Tensor slice(const Tensor& x, int axis, std::int64_t start, std::int64_t length);

/// 2-D product op(a)·op(b), op = transpose when the flag is set.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false,
              bool trans_b = false);
/// Affine map over the last axis: x[..., in] · Wᵀ + b.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

/// Same-padded cross-correlation. x: [B, C, spatial...], w: [O, C, k...] with
/// `dims` ∈ {2, 3} spatial axes and odd k ∈ {1, 3}.
Tensor conv(const Tensor& x, const Tensor& w, int dims);
/// Gradient of conv with respect to its kernel, shaped like a kernel with
/// extent `kernel`.
Tensor conv_weight_grad(const Tensor& x, const Tensor& grad_out, int dims,
                        int kernel);
/// w[o, c, k] -> w[c, o, flip(k)]; turns a conv into its adjoint.
Tensor flip_transpose_kernel(const Tensor& w, int dims);

/// Nearest-neighbour upsampling of the trailing `dims` axes by `scale` ∈ {1,2}.
Tensor upsample_nearest(const Tensor& x, int scale, int dims);
/// Sums non-overlapping scale^dims blocks (the adjoint of upsample_nearest).
Tensor downsample_sum(const Tensor& x, int scale, int dims);
Tensor avg_pool(const Tensor& x, int scale, int dims);

/// Trilinear lookup of V: [B, C, D, H, W] at world points [B, P, 3] in
/// [-1, 1]^3 (x along W, y along H, z along D; voxel centres at cell centres,
/// border-clamped). Returns [B, P, C]. Differentiable in V only.
Tensor trilinear_sample(const Tensor& volume,
                        std::shared_ptr<const std::vector<double>> points,
                        std::int64_t num_points);
/// Adjoint of trilinear_sample: splats [B, P, C] values into a volume shape.
Tensor trilinear_splat(const Tensor& values,
                       std::shared_ptr<const std::vector<double>> points,
                       const Shape& volume_shape);

/// Running sum along `axis`; exclusive skips the current element and
/// reverse accumulates from the end.
Tensor cumsum(const Tensor& x, int axis, bool exclusive = false,
              bool reverse = false);

// Constructors that never record.
class Rng;
Tensor randn(const Shape& shape, Rng& rng, double stddev = 1.0,
             DType dtype = DType::f32);
Tensor rand_uniform(const Shape& shape, Rng& rng, double lo, double hi,
                    DType dtype = DType::f32);

}  // namespace vgan
