// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/renderer/volume_render.hpp"

#include "vgan/diffcore/ops.hpp"

namespace vgan {

namespace {

void require_nonnegative(const Tensor& t, const char* what) {
  dispatch(t.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto d = t.data<T>();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] < T(0))
        throw Error(std::string("accumulate: negative ") + what + " at index " + std::to_string(i));
  });
}

}  // namespace

Accumulated accumulate(const Tensor& sigma, const Tensor& delta, const Tensor& feature) {
  if (sigma.shape() != delta.shape())
    throw ShapeError("accumulate: sigma " + shape_str(sigma.shape()) + " vs delta " +
                     shape_str(delta.shape()));
  Shape expect = sigma.shape();
  expect.push_back(feature.size(-1));
  if (feature.shape() != expect)
    throw ShapeError("accumulate: feature " + shape_str(feature.shape()) + " expected " +
                     shape_str(expect));
  require_nonnegative(sigma, "density");
  require_nonnegative(delta, "interval");
  const int axis = sigma.rank() - 1;
  Tensor tau = mul(sigma, delta);
  Accumulated out;
  out.rays.transmittance = exp(neg(cumsum(tau, axis, true)));
  out.rays.weights = mul(out.rays.transmittance, add(neg(exp(neg(tau))), 1.0));
  Shape ws = sigma.shape();
  ws.push_back(1);
  out.feature = sum(mul(reshape(out.rays.weights, ws), feature), {axis});
  return out;
}

std::vector<double> sample_intervals(const std::vector<double>& depths, double far) {
  std::vector<double> d(depths.size());
  for (std::size_t k = 0; k + 1 < depths.size(); ++k) d[k] = depths[k + 1] - depths[k];
  if (!depths.empty()) d.back() = far - depths.back();
  return d;
}

FeatureMap render_feature_map(const Tensor& sigma, const Tensor& delta, const Tensor& feature,
                              int height, int width) {
  if (sigma.rank() != 3 || sigma.size(1) != static_cast<std::int64_t>(height) * width)
    throw ShapeError("render_feature_map: " + std::to_string(height) + "×" +
                     std::to_string(width) + " rays but sigma is " + shape_str(sigma.shape()));
  Accumulated acc = accumulate(sigma, delta, feature);
  const std::int64_t b = sigma.size(0), f = feature.size(-1);
  FeatureMap out;
  out.map = permute(reshape(acc.feature, {b, height, width, f}), {0, 3, 1, 2});
  out.rays = acc.rays;
  return out;
}

std::vector<double> render_expected_depth(const std::vector<double>& weights,
                                          const std::vector<double>& depths, std::int64_t n,
                                          double sentinel) {
  if (weights.size() != depths.size() || n <= 0 || weights.size() % n)
    throw ShapeError("render_expected_depth: weights and depths must both be [R, N]");
  const std::size_t rays = weights.size() / static_cast<std::size_t>(n);
  std::vector<double> out(rays);
  for (std::size_t r = 0; r < rays; ++r) {
    double wsum = 0.0, acc = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      wsum += weights[r * n + k];
      acc += weights[r * n + k] * depths[r * n + k];
    }
    out[r] = wsum < 0.5 ? sentinel : acc;
  }
  return out;
}

}  // namespace vgan
