// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "vgan/diffcore/tape.hpp"
#include "vgan/diffcore/tensor.hpp"
#include "vgan/nnlayers/params.hpp"

namespace vgan {

class Rng;

struct DiscriminatorConfig {
  int max_res = 32;
  std::int64_t base_channels = 16;  // width at max_res
  std::int64_t max_channels = 512;
};

/// Residual downsampling CNN with a 1×1 fromRGB stem per resolution so that
/// it accepts every power-of-two resolution from 4 up to max_res.
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& cfg, Rng& rng, DType dtype = DType::f32);

  /// images [B, 3, r, r] → scores [B]. With alpha < 1 the top block fades in
  /// over the stem of resolution r/2 applied to the pooled input.
  Tensor operator()(const Tensor& images, double alpha = 1.0) const;

  std::int64_t channels(int res) const;
  const DiscriminatorConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  struct Block {
    Tensor w1, b1, w2, b2, skip;
  };
  int level_of(int res) const;
  Tensor stem(const Tensor& images, int level) const;
  Tensor block(const Tensor& h, int level) const;

  DiscriminatorConfig cfg_;
  std::vector<Tensor> stem_w_, stem_b_;  // level 0 = max_res
  std::vector<Block> blocks_;            // level i: res_i → res_i / 2
  Tensor head_w1_, head_b1_, head_w2_, head_b2_;
  ParamSet params_;
};

struct LossPair {
  Tensor g_loss;  // mean softplus(−D(fake))
  Tensor d_loss;  // mean softplus(−D(real)) + mean softplus(D(fake))
};

LossPair logistic_losses(const Tensor& scores_real, const Tensor& scores_fake);
Tensor generator_loss(const Tensor& scores_fake);
Tensor discriminator_loss(const Tensor& scores_real, const Tensor& scores_fake);

/// Mean over the batch of ‖∇_I D(I)‖². Records on `tape` with a
/// differentiable gradient, so the result can be back-propagated into D.
/// `scores`, when given, receives D(real) from the same forward pass.
Tensor r1_penalty(const std::function<Tensor(const Tensor&)>& d, const Tensor& real, Tape& tape,
                  Tensor* scores = nullptr);

}  // namespace vgan
