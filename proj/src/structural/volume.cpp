// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/structural/volume.hpp"

#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/nnlayers/layers.hpp"

namespace vgan {

FeatureVolumeNet::FeatureVolumeNet(const StructuralConfig& cfg, Rng& rng, DType dtype)
    : cfg_(cfg) {
  if (cfg.stage_channels.empty()) throw Error("structural net needs at least one stage");
  const std::int64_t r = cfg.template_res;
  template_ = params_.add("template",
                          randn({1, cfg.template_channels, r, r, r}, rng, 0.1, dtype));
  std::int64_t in = cfg.template_channels;
  for (std::size_t i = 0; i < cfg.stage_channels.size(); ++i) {
    const std::int64_t out = cfg.stage_channels[i];
    const std::string p = "stage" + std::to_string(i);
    conv_w_.push_back(params_.add(
        p + ".w", init_fan_in_normal({out, in, 3, 3, 3}, in * 27, std::sqrt(2.0), rng, dtype)));
    conv_b_.push_back(params_.add(p + ".b", Tensor::zeros({out}, dtype)));
    in = out;
  }
}

std::int64_t FeatureVolumeNet::output_res() const {
  return cfg_.template_res << cfg_.stage_channels.size();
}

Tensor FeatureVolumeNet::synthesize(const std::vector<Tensor>& gamma,
                                    const std::vector<Tensor>& beta,
                                    std::vector<Tensor>* stages) const {
  if (gamma.size() != conv_w_.size() || beta.size() != conv_w_.size())
    throw Error("synthesize: expected " + std::to_string(conv_w_.size()) + " AdaIN styles");
  const std::int64_t b = gamma[0].size(0);
  Shape s = template_.shape();
  s[0] = b;
  Tensor v = expand(template_, s);
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    v = upsample_nearest(v, 2, 3);
    v = conv(v, conv_w_[i], 3);
    v = add(v, reshape(conv_b_[i], {1, conv_b_[i].size(0), 1, 1, 1}));
    v = adain(leaky_relu(v), gamma[i], beta[i]);
    if (stages) stages->push_back(v);
  }
  return v;
}

Tensor batch_query(const Tensor& volume, std::shared_ptr<const std::vector<double>> points,
                   std::int64_t num_points) {
  return trilinear_sample(volume, std::move(points), num_points);
}

std::vector<double> query_descriptor(const Tensor& volume, const Eigen::Vector3d& x) {
  if (volume.rank() != 4) throw ShapeError("query_descriptor expects V [C, D, H, W]");
  Shape s = volume.shape();
  s.insert(s.begin(), 1);
  auto pts = std::make_shared<const std::vector<double>>(std::vector<double>{x.x(), x.y(), x.z()});
  return trilinear_sample(volume.alias(s), pts, 1).values();
}

}  // namespace vgan
