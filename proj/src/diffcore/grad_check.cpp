// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"

namespace vgan {

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps,
                  const GradCheckOptions& options) {
  if (!(eps > 0.0)) throw Error("grad_check: eps must be positive");
  x = x.detach();
  x.requires_grad_();

  Tensor analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor y = f(x);
    if (y.numel() != 1) throw ShapeError("grad_check: f must return a scalar");
    const Tensor inputs[] = {x};
    analytic = grad(tape, y, inputs)[0];
  }

  std::vector<std::int64_t> coords(static_cast<std::size_t>(x.numel()));
  std::iota(coords.begin(), coords.end(), 0);
  if (options.max_coords > 0 && options.max_coords < x.numel()) {
    Rng rng(options.seed);
    for (std::size_t i = coords.size() - 1; i > 0; --i)
      std::swap(coords[i], coords[rng.below(i + 1)]);
    coords.resize(static_cast<std::size_t>(options.max_coords));
  }

  NoGradScope no_grad;
  Tensor probe = x.clone();
  double worst = 0.0;
  for (std::int64_t c : coords) {
    const double v = probe.flat(c);
    probe.set_flat(c, v + eps);
    const double fp = f(probe).item();
    probe.set_flat(c, v - eps);
    const double fm = f(probe).item();
    probe.set_flat(c, v);
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic.flat(c);
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace vgan
