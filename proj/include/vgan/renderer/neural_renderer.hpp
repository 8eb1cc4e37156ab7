// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vgan/diffcore/tensor.hpp"
#include "vgan/nnlayers/params.hpp"

namespace vgan {

class Rng;

struct RendererConfig {
  std::int64_t feature_dim = 256;
  /// Output channels of each ×2 stage.
  std::vector<std::int64_t> stage_channels = {128, 64};
  int torgb_kernel = 3;
  bool demod = true;
};

/// Per doubling: up×2 then two (ModConv 1×1 + bias + LReLU); a toRGB conv and
/// tanh at the top. Every level owns a toRGB so training can grow the stack.
class NeuralRenderer {
 public:
  NeuralRenderer(const RendererConfig& cfg, Rng& rng, DType dtype = DType::f32);

  /// M [B, F, H, W] → image [B, 3, H·2^levels, W·2^levels]. With alpha < 1 the
  /// top level is blended with the upsampled output of the level below.
  Tensor render(const Tensor& feature_map, const std::vector<Tensor>& mod_scale, int levels,
                double alpha = 1.0) const;
  Tensor render(const Tensor& feature_map, const std::vector<Tensor>& mod_scale) const {
    return render(feature_map, mod_scale, num_stages());
  }

  int num_stages() const { return static_cast<int>(cfg_.stage_channels.size()); }
  /// Input widths of every ModConv, in evaluation order.
  std::vector<std::int64_t> modconv_channels() const;
  const RendererConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  Tensor to_rgb(const Tensor& h, int level) const;

  RendererConfig cfg_;
  std::vector<Tensor> mod_w_, mod_b_;
  std::vector<Tensor> rgb_w_, rgb_b_;
  ParamSet params_;
};

}  // namespace vgan
