// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/trainer/adam.hpp"

#include <cmath>

namespace vgan {

Adam::Adam(ParamSet& params, const AdamConfig& cfg) : params_(&params), cfg_(cfg) {
  for (const auto& [name, t] : params) {
    m_.emplace_back(static_cast<std::size_t>(t.numel()), 0.0);
    v_.emplace_back(static_cast<std::size_t>(t.numel()), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double b0 = cfg_.beta0, b1 = cfg_.beta1;
  const double c0 = 1.0 - std::pow(b0, static_cast<double>(t_));
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_->size(); ++i) {
    Tensor& p = params_->at(i);
    const Tensor g = p.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    dispatch(p.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto pd = p.template data<T>();
      if (!g.defined()) {
        for (std::size_t k = 0; k < pd.size(); ++k) {
          m[k] *= b0;
          v[k] *= b1;
        }
        return;
      }
      auto gd = g.template data<T>();
      for (std::size_t k = 0; k < pd.size(); ++k) {
        const double gk = static_cast<double>(gd[k]);
        m[k] = b0 * m[k] + (1.0 - b0) * gk;
        v[k] = b1 * v[k] + (1.0 - b1) * gk * gk;
        const double update = cfg_.lr * (m[k] / c0) / (std::sqrt(v[k] / c1) + cfg_.eps);
        pd[k] = static_cast<T>(static_cast<double>(pd[k]) - update);
      }
    });
  }
}

}  // namespace vgan
