// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

struct GradCheckOptions {
  /// Check at most this many coordinates (0 = all), chosen with `seed`.
  std::int64_t max_coords = 0;
  std::uint64_t seed = 0;
};

/// Max over coordinates of |analytic − central difference| / max(1, |analytic|)
/// for the scalar function `f` at the leaf `x`. `f` must build its graph from
/// `x` through ordinary ops; `x.requires_grad()` is switched on for the check.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                  double eps, const GradCheckOptions& options = {});

}  // namespace vgan
