// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "vgan/diffcore/tensor.hpp"
#include "vgan/nnlayers/params.hpp"

namespace vgan {

class Rng;

struct FieldConfig {
  std::int64_t descriptor_dim = 32;
  std::int64_t hidden = 256;
  int layers = 4;
  std::int64_t feature_dim = 256;
  double gamma0 = 15.0;
};

struct FieldSamples {
  Tensor feature;  // [B, P, F]
  Tensor sigma;    // [B, P], nonnegative
};

/// FiLM-SIREN trunk over concat(descriptor, x) with a softplus density head
/// on the last hidden state and a feature head on concat(hidden, d).
class FieldNet {
 public:
  FieldNet(const FieldConfig& cfg, Rng& rng, DType dtype = DType::f32);

  /// descriptors [B, P, C], coords and dirs [B, P, 3], one FiLM pair per layer.
  FieldSamples eval(const Tensor& descriptors, const Tensor& coords, const Tensor& dirs,
                    const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta) const;
  /// The σ path alone; bit-identical to eval(...).sigma.
  Tensor density(const Tensor& descriptors, const Tensor& coords,
                 const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta) const;

  std::vector<std::int64_t> film_widths() const;
  const FieldConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  Tensor trunk(const Tensor& descriptors, const Tensor& coords, const std::vector<Tensor>& gamma,
               const std::vector<Tensor>& beta) const;
  Tensor density_head(const Tensor& h) const;

  FieldConfig cfg_;
  std::vector<Tensor> w_, b_;
  Tensor density_w_, density_b_, feature_w_, feature_b_;
  ParamSet params_;
};

/// Single-point convenience form of FieldNet::eval with [hidden] FiLM vectors
/// taken from row `row` of batched conditioning.
struct PointSample {
  std::vector<double> feature;
  double sigma;
};
PointSample eval_field(const FieldNet& net, const std::vector<double>& descriptor,
                       const Eigen::Vector3d& x, const Eigen::Vector3d& d,
                       const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta,
                       std::int64_t row = 0);

}  // namespace vgan
