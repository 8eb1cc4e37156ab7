// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/nnlayers/mapping.hpp"

#include <cmath>
#include <string>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"

namespace vgan {

MappingNetwork::MappingNetwork(const MappingConfig& cfg, const ConditioningLayout& layout,
                               Rng& rng, DType dtype)
    : cfg_(cfg), layout_(layout) {
  if (cfg.depth < 1 || cfg.width < 1 || cfg.latent_dim < 1)
    throw Error("mapping network needs positive depth, width and latent_dim");
  std::int64_t in = cfg.latent_dim;
  for (int i = 0; i < cfg.depth; ++i) {
    const std::string p = "trunk" + std::to_string(i);
    Affine a;
    a.w = params_.add(p + ".w", init_fan_in_normal({cfg.width, in}, in, std::sqrt(2.0), rng, dtype));
    a.b = params_.add(p + ".b", Tensor::zeros({cfg.width}, dtype));
    trunk_.push_back(a);
    in = cfg.width;
  }
  auto head = [&](const std::string& name, std::int64_t out, double gain) {
    Affine a;
    a.w = params_.add(name + ".w", init_fan_in_normal({out, cfg.width}, cfg.width, gain, rng, dtype));
    a.b = params_.add(name + ".b", Tensor::zeros({out}, dtype));
    return a;
  };
  for (std::size_t i = 0; i < layout.adain_channels.size(); ++i)
    adain_heads_.push_back(head("adain" + std::to_string(i), 2 * layout.adain_channels[i], 0.1));
  for (std::size_t i = 0; i < layout.film_widths.size(); ++i)
    film_heads_.push_back(head("film" + std::to_string(i), 2 * layout.film_widths[i], 0.1));
  for (std::size_t i = 0; i < layout.modconv_channels.size(); ++i)
    mod_heads_.push_back(head("mod" + std::to_string(i), layout.modconv_channels[i], 0.1));
}

Conditioning MappingNetwork::operator()(const CodeBundle& codes) const {
  const std::int64_t b = codes.batch();
  for (const Tensor* z : {&codes.z_structural, &codes.z_field, &codes.z_renderer})
    if (z->shape() != Shape{b, cfg_.latent_dim})
      throw ShapeError("latent code " + shape_str(z->shape()) + " expected [" +
                       std::to_string(b) + ", " + std::to_string(cfg_.latent_dim) + "]");
  // Fixed row placement keeps each code's arithmetic independent of the others.
  Tensor h = concat({codes.z_structural, codes.z_field, codes.z_renderer}, 0);
  for (const Affine& a : trunk_) h = leaky_relu(linear(h, a.w, a.b));
  const Tensor hs = slice(h, 0, 0, b);
  const Tensor hf = slice(h, 0, b, b);
  const Tensor hr = slice(h, 0, 2 * b, b);

  Conditioning out;
  for (std::size_t i = 0; i < adain_heads_.size(); ++i) {
    const std::int64_t c = layout_.adain_channels[i];
    Tensor raw = linear(hs, adain_heads_[i].w, adain_heads_[i].b);
    out.adain_gamma.push_back(add(slice(raw, 1, 0, c), 1.0));
    out.adain_beta.push_back(slice(raw, 1, c, c));
  }
  for (std::size_t i = 0; i < film_heads_.size(); ++i) {
    const std::int64_t w = layout_.film_widths[i];
    Tensor raw = linear(hf, film_heads_[i].w, film_heads_[i].b);
    out.film_gamma.push_back(mul(add(slice(raw, 1, 0, w), 1.0), cfg_.film_gamma0));
    out.film_beta.push_back(slice(raw, 1, w, w));
  }
  for (const Affine& a : mod_heads_) out.mod_scale.push_back(exp(linear(hr, a.w, a.b)));
  return out;
}

}  // namespace vgan
