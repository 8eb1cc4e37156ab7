// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/nnlayers/layers.hpp"

#include "vgan/diffcore/ops.hpp"

namespace vgan {

namespace {

Shape channel_broadcast_shape(std::int64_t batch, std::int64_t channels, int rank) {
  Shape s{batch, channels};
  for (int i = 2; i < rank; ++i) s.push_back(1);
  return s;
}

}  // namespace

Tensor adain(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (gamma.rank() == 1) {
    Shape batched = x.shape();
    batched.insert(batched.begin(), 1);
    const std::int64_t c = gamma.size(0);
    Tensor y = adain(reshape(x, batched), reshape(gamma, {1, c}), reshape(beta, {1, c}), eps);
    return reshape(y, x.shape());
  }
  if (x.rank() < 3) throw ShapeError("adain input needs spatial axes, got " + shape_str(x.shape()));
  const std::int64_t b = x.size(0), c = x.size(1);
  if (gamma.shape() != Shape{b, c} || beta.shape() != Shape{b, c})
    throw ShapeError("adain: style " + shape_str(gamma.shape()) + "/" + shape_str(beta.shape()) +
                     " does not match input " + shape_str(x.shape()));
  std::vector<int> axes;
  for (int i = 2; i < x.rank(); ++i) axes.push_back(i);
  Tensor centered = sub(x, mean(x, axes, true));
  Tensor var = mean(square(centered), axes, true);
  Tensor xhat = mul(centered, pow(add(var, eps), -0.5));
  const Shape bs = channel_broadcast_shape(b, c, x.rank());
  return add(mul(xhat, reshape(gamma, bs)), reshape(beta, bs));
}

Tensor film_siren(const Tensor& x, const Tensor& w, const Tensor& b, const Tensor& gamma,
                  const Tensor& beta) {
  const std::int64_t hidden = w.size(0);
  if (gamma.size(-1) != hidden || beta.size(-1) != hidden || gamma.shape() != beta.shape())
    throw ShapeError("film_siren: conditioning " + shape_str(gamma.shape()) + "/" +
                     shape_str(beta.shape()) + " does not match width " + std::to_string(hidden));
  Tensor h = linear(x, w, b);
  if (gamma.rank() == 1) return sin(add(mul(h, gamma), beta));
  if (x.rank() != 3 || gamma.rank() != 2 || gamma.size(0) != x.size(0))
    throw ShapeError("film_siren: batched conditioning " + shape_str(gamma.shape()) +
                     " needs input [B, P, in], got " + shape_str(x.shape()));
  const Shape bs{gamma.size(0), 1, hidden};
  return sin(add(mul(h, reshape(gamma, bs)), reshape(beta, bs)));
}

Tensor modconv1x1(const Tensor& x, const Tensor& w, const Tensor& s, bool demod, double eps) {
  if (s.rank() == 1) {
    Shape batched = x.shape();
    batched.insert(batched.begin(), 1);
    Tensor y = modconv1x1(reshape(x, batched), w, reshape(s, {1, s.size(0)}), demod, eps);
    Shape out = x.shape();
    out[0] = w.size(0);
    return reshape(y, out);
  }
  if (x.rank() != 4 || w.rank() != 2)
    throw ShapeError("modconv1x1 expects x [B, Cin, H, W] and w [Cout, Cin]");
  const std::int64_t b = x.size(0), cin = x.size(1), cout = w.size(0);
  if (w.size(1) != cin || s.shape() != Shape{b, cin})
    throw ShapeError("modconv1x1: channel mismatch among x " + shape_str(x.shape()) + ", w " +
                     shape_str(w.shape()) + ", s " + shape_str(s.shape()));
  Tensor y = conv(mul(x, reshape(s, {b, cin, 1, 1})), reshape(w, {cout, cin, 1, 1}), 2);
  if (!demod) return y;
  Tensor d = pow(add(matmul(square(s), square(w), false, true), eps), -0.5);
  return mul(y, reshape(d, {b, cout, 1, 1}));
}

}  // namespace vgan
