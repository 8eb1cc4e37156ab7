// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vgan/nnlayers/params.hpp"

namespace vgan {

struct AdamConfig {
  double lr = 2.5e-4;
  double beta0 = 0.0;
  double beta1 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam without weight decay. Moments are kept in float64.
class Adam {
 public:
  Adam(ParamSet& params, const AdamConfig& cfg);

  /// Applies one update from the current grad() buffers; parameters without a
  /// gradient are left untouched (their moments still decay).
  void step();

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  std::vector<std::vector<double>>& first_moment() { return m_; }
  std::vector<std::vector<double>>& second_moment() { return v_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  ParamSet* params_;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace vgan
