// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

/// Instance-normalizes each channel of x over its spatial axes, then applies
/// gamma·x̂ + beta. x is [B, C, spatial...] with gamma, beta [B, C], or
/// [C, spatial...] with gamma, beta [C].
Tensor adain(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-8);

/// sin(gamma ⊙ (x·Wᵀ + b) + beta). x is [B, P, in] with gamma, beta [B, hidden]
/// shared across the P points of a sample, or [..., in] with [hidden] vectors.
Tensor film_siren(const Tensor& x, const Tensor& w, const Tensor& b, const Tensor& gamma,
                  const Tensor& beta);

/// Modulated 1×1 convolution. x [B, Cin, H, W], w [Cout, Cin], s [B, Cin]
/// (or x [Cin, H, W] with s [Cin]).
Tensor modconv1x1(const Tensor& x, const Tensor& w, const Tensor& s, bool demod,
                  double eps = 1e-8);

}  // namespace vgan
