// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/field/field.hpp"

#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/nnlayers/layers.hpp"

namespace vgan {

FieldNet::FieldNet(const FieldConfig& cfg, Rng& rng, DType dtype) : cfg_(cfg) {
  if (cfg.layers < 1) throw Error("field needs at least one layer");
  std::int64_t in = cfg.descriptor_dim + 3;
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string p = "film" + std::to_string(i);
    const double fan = static_cast<double>(in);
    const double bound = i == 0 ? 1.0 / fan : std::sqrt(6.0 / fan) / cfg.gamma0;
    w_.push_back(params_.add(p + ".w", init_uniform({cfg.hidden, in}, bound, rng, dtype)));
    b_.push_back(params_.add(p + ".b", init_uniform({cfg.hidden}, 1.0 / std::sqrt(fan), rng, dtype)));
    in = cfg.hidden;
  }
  density_w_ = params_.add("density.w", init_fan_in_normal({1, cfg.hidden}, cfg.hidden, 1.0, rng, dtype));
  density_b_ = params_.add("density.b", Tensor::zeros({1}, dtype));
  feature_w_ = params_.add("feature.w", init_fan_in_normal({cfg.feature_dim, cfg.hidden + 3},
                                                           cfg.hidden + 3, 1.0, rng, dtype));
  feature_b_ = params_.add("feature.b", Tensor::zeros({cfg.feature_dim}, dtype));
}

std::vector<std::int64_t> FieldNet::film_widths() const {
  return std::vector<std::int64_t>(static_cast<std::size_t>(cfg_.layers), cfg_.hidden);
}

Tensor FieldNet::trunk(const Tensor& descriptors, const Tensor& coords,
                       const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta) const {
  if (gamma.size() != w_.size() || beta.size() != w_.size())
    throw Error("field: expected " + std::to_string(w_.size()) + " FiLM pairs");
  if (descriptors.rank() != 3 || coords.rank() != 3 || coords.size(2) != 3 ||
      descriptors.size(0) != coords.size(0) || descriptors.size(1) != coords.size(1))
    throw ShapeError("field: ragged inputs " + shape_str(descriptors.shape()) + " and " +
                     shape_str(coords.shape()));
  if (descriptors.size(2) != cfg_.descriptor_dim)
    throw ShapeError("field: descriptor width " + std::to_string(descriptors.size(2)) +
                     " != " + std::to_string(cfg_.descriptor_dim));
  Tensor h = concat({descriptors, coords}, 2);
  for (std::size_t i = 0; i < w_.size(); ++i) h = film_siren(h, w_[i], b_[i], gamma[i], beta[i]);
  return h;
}

Tensor FieldNet::density_head(const Tensor& h) const {
  Tensor raw = linear(h, density_w_, density_b_);
  return reshape(softplus(raw), {h.size(0), h.size(1)});
}

FieldSamples FieldNet::eval(const Tensor& descriptors, const Tensor& coords, const Tensor& dirs,
                            const std::vector<Tensor>& gamma,
                            const std::vector<Tensor>& beta) const {
  if (dirs.shape() != coords.shape())
    throw ShapeError("field: directions " + shape_str(dirs.shape()) + " vs coords " +
                     shape_str(coords.shape()));
  Tensor h = trunk(descriptors, coords, gamma, beta);
  FieldSamples out;
  out.sigma = density_head(h);
  out.feature = linear(concat({h, dirs}, 2), feature_w_, feature_b_);
  return out;
}

Tensor FieldNet::density(const Tensor& descriptors, const Tensor& coords,
                         const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta) const {
  return density_head(trunk(descriptors, coords, gamma, beta));
}

PointSample eval_field(const FieldNet& net, const std::vector<double>& descriptor,
                       const Eigen::Vector3d& x, const Eigen::Vector3d& d,
                       const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta,
                       std::int64_t row) {
  const DType dt = gamma.at(0).dtype();
  const auto c = static_cast<std::int64_t>(descriptor.size());
  Tensor v = Tensor::from(descriptor, {1, 1, c}, dt);
  const double xs[] = {x.x(), x.y(), x.z()};
  const double ds[] = {d.x(), d.y(), d.z()};
  Tensor xt = Tensor::from(xs, {1, 1, 3}, dt);
  Tensor dtn = Tensor::from(ds, {1, 1, 3}, dt);
  std::vector<Tensor> g, b;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    g.push_back(slice(gamma[i], 0, row, 1));
    b.push_back(slice(beta[i], 0, row, 1));
  }
  FieldSamples s = net.eval(v, xt, dtn, g, b);
  return {s.feature.values(), s.sigma.item()};
}

}  // namespace vgan
