// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vgan/diffcore/tensor.hpp"
#include "vgan/nnlayers/params.hpp"

namespace vgan {

class Rng;

/// Three latent codes, one per conditioned sub-network. Each is [B, latent].
struct CodeBundle {
  Tensor z_structural;
  Tensor z_field;
  Tensor z_renderer;

  static CodeBundle tied(const Tensor& z) { return {z, z, z}; }
  std::int64_t batch() const { return z_structural.size(0); }
};

/// Widths of every layer that consumes conditioning.
struct ConditioningLayout {
  std::vector<std::int64_t> adain_channels;
  std::vector<std::int64_t> film_widths;
  std::vector<std::int64_t> modconv_channels;
};

struct Conditioning {
  std::vector<Tensor> adain_gamma, adain_beta;  // [B, C]
  std::vector<Tensor> film_gamma, film_beta;    // [B, hidden]
  std::vector<Tensor> mod_scale;                // [B, Cin]

  std::size_t bundle_count() const {
    return adain_gamma.size() + film_gamma.size() + mod_scale.size();
  }
};

struct MappingConfig {
  std::int64_t latent_dim = 256;
  std::int64_t width = 256;
  int depth = 3;
  double film_gamma0 = 15.0;
};

/// Shared LReLU trunk applied to each code, followed by one affine head per
/// consuming layer. AdaIN heads read the structural code, FiLM heads the field
/// code and ModConv heads the renderer code.
class MappingNetwork {
 public:
  MappingNetwork(const MappingConfig& cfg, const ConditioningLayout& layout, Rng& rng,
                 DType dtype = DType::f32);

  Conditioning operator()(const CodeBundle& codes) const;
  Conditioning operator()(const Tensor& z) const { return (*this)(CodeBundle::tied(z)); }

  const MappingConfig& config() const { return cfg_; }
  const ConditioningLayout& layout() const { return layout_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  struct Affine {
    Tensor w, b;
  };

  MappingConfig cfg_;
  ConditioningLayout layout_;
  std::vector<Affine> trunk_;
  std::vector<Affine> adain_heads_, film_heads_, mod_heads_;
  ParamSet params_;
};

}  // namespace vgan
