// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/renderer/neural_renderer.hpp"

#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/nnlayers/layers.hpp"

namespace vgan {

NeuralRenderer::NeuralRenderer(const RendererConfig& cfg, Rng& rng, DType dtype) : cfg_(cfg) {
  if (cfg.torgb_kernel != 1 && cfg.torgb_kernel != 3) throw Error("toRGB kernel must be 1 or 3");
  std::int64_t in = cfg.feature_dim;
  const int k = cfg.torgb_kernel;
  auto add_rgb = [&](int level, std::int64_t c) {
    const std::string p = "rgb" + std::to_string(level);
    rgb_w_.push_back(params_.add(p + ".w", init_fan_in_normal({3, c, k, k}, c * k * k, 1.0, rng, dtype)));
    rgb_b_.push_back(params_.add(p + ".b", Tensor::zeros({3}, dtype)));
  };
  add_rgb(0, in);
  for (std::size_t s = 0; s < cfg.stage_channels.size(); ++s) {
    const std::int64_t out = cfg.stage_channels[s];
    for (int j = 0; j < 2; ++j) {
      const std::string p = "mod" + std::to_string(2 * s + j);
      const std::int64_t cin = j == 0 ? in : out;
      mod_w_.push_back(params_.add(p + ".w", init_fan_in_normal({out, cin}, cin, 1.0, rng, dtype)));
      mod_b_.push_back(params_.add(p + ".b", Tensor::zeros({out}, dtype)));
    }
    add_rgb(static_cast<int>(s) + 1, out);
    in = out;
  }
}

std::vector<std::int64_t> NeuralRenderer::modconv_channels() const {
  std::vector<std::int64_t> c;
  std::int64_t in = cfg_.feature_dim;
  for (std::int64_t out : cfg_.stage_channels) {
    c.push_back(in);
    c.push_back(out);
    in = out;
  }
  return c;
}

Tensor NeuralRenderer::to_rgb(const Tensor& h, int level) const {
  const Tensor& b = rgb_b_[static_cast<std::size_t>(level)];
  return add(conv(h, rgb_w_[static_cast<std::size_t>(level)], 2), reshape(b, {1, 3, 1, 1}));
}

Tensor NeuralRenderer::render(const Tensor& feature_map, const std::vector<Tensor>& mod_scale,
                              int levels, double alpha) const {
  if (levels < 0 || levels > num_stages())
    throw Error("renderer: levels " + std::to_string(levels) + " outside [0, " +
                std::to_string(num_stages()) + "]");
  if (mod_scale.size() != mod_w_.size())
    throw Error("renderer: expected " + std::to_string(mod_w_.size()) + " modulation vectors");
  if (feature_map.rank() != 4 || feature_map.size(1) != cfg_.feature_dim)
    throw ShapeError("renderer: feature map " + shape_str(feature_map.shape()) +
                     " does not have " + std::to_string(cfg_.feature_dim) + " channels");
  Tensor h = feature_map;
  Tensor previous;
  for (int s = 0; s < levels; ++s) {
    if (s == levels - 1 && alpha < 1.0) previous = h;
    h = upsample_nearest(h, 2, 2);
    for (int j = 0; j < 2; ++j) {
      const auto i = static_cast<std::size_t>(2 * s + j);
      h = modconv1x1(h, mod_w_[i], mod_scale[i], cfg_.demod);
      h = leaky_relu(add(h, reshape(mod_b_[i], {1, mod_b_[i].size(0), 1, 1})));
    }
  }
  Tensor rgb = to_rgb(h, levels);
  if (previous.defined()) {
    Tensor low = upsample_nearest(to_rgb(previous, levels - 1), 2, 2);
    rgb = add(mul(rgb, alpha), mul(low, 1.0 - alpha));
  }
  return tanh(rgb);
}

}  // namespace vgan
