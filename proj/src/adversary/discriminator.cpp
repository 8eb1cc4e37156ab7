// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/adversary/discriminator.hpp"

#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"

namespace vgan {

namespace {

Tensor add_bias(const Tensor& h, const Tensor& b) {
  return add(h, reshape(b, {1, b.size(0), 1, 1}));
}

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

Discriminator::Discriminator(const DiscriminatorConfig& cfg, Rng& rng, DType dtype) : cfg_(cfg) {
  if (!is_pow2(cfg.max_res) || cfg.max_res < 4)
    throw Error("discriminator max_res must be a power of two ≥ 4");
  const double g = std::sqrt(2.0);
  int level = 0;
  for (int r = cfg.max_res; r >= 4; r /= 2, ++level) {
    const std::int64_t c = channels(r);
    const std::string s = "stem" + std::to_string(r);
    stem_w_.push_back(params_.add(s + ".w", init_fan_in_normal({c, 3, 1, 1}, 3, g, rng, dtype)));
    stem_b_.push_back(params_.add(s + ".b", Tensor::zeros({c}, dtype)));
    if (r == 4) break;
    const std::int64_t co = channels(r / 2);
    const std::string p = "block" + std::to_string(r);
    Block b;
    b.w1 = params_.add(p + ".conv1.w", init_fan_in_normal({c, c, 3, 3}, c * 9, g, rng, dtype));
    b.b1 = params_.add(p + ".conv1.b", Tensor::zeros({c}, dtype));
    b.w2 = params_.add(p + ".conv2.w", init_fan_in_normal({co, c, 3, 3}, c * 9, g, rng, dtype));
    b.b2 = params_.add(p + ".conv2.b", Tensor::zeros({co}, dtype));
    b.skip = params_.add(p + ".skip.w", init_fan_in_normal({co, c, 1, 1}, c, 1.0, rng, dtype));
    blocks_.push_back(b);
  }
  const std::int64_t c4 = channels(4);
  head_w1_ = params_.add("head.fc1.w", init_fan_in_normal({c4, c4 * 16}, c4 * 16, g, rng, dtype));
  head_b1_ = params_.add("head.fc1.b", Tensor::zeros({c4}, dtype));
  head_w2_ = params_.add("head.fc2.w", init_fan_in_normal({1, c4}, c4, 1.0, rng, dtype));
  head_b2_ = params_.add("head.fc2.b", Tensor::zeros({1}, dtype));
}

std::int64_t Discriminator::channels(int res) const {
  return std::min(cfg_.max_channels, cfg_.base_channels * (cfg_.max_res / res));
}

int Discriminator::level_of(int res) const {
  int level = 0;
  for (int r = cfg_.max_res; r > res; r /= 2) ++level;
  if (!is_pow2(res) || res < 4 || res > cfg_.max_res)
    throw ShapeError("discriminator: resolution " + std::to_string(res) +
                     " not in the supported ladder 4.." + std::to_string(cfg_.max_res));
  return level;
}

Tensor Discriminator::stem(const Tensor& images, int level) const {
  const auto l = static_cast<std::size_t>(level);
  return leaky_relu(add_bias(conv(images, stem_w_[l], 2), stem_b_[l]));
}

Tensor Discriminator::block(const Tensor& h, int level) const {
  const Block& b = blocks_[static_cast<std::size_t>(level)];
  Tensor y = leaky_relu(add_bias(conv(h, b.w1, 2), b.b1));
  y = leaky_relu(add_bias(conv(y, b.w2, 2), b.b2));
  y = avg_pool(y, 2, 2);
  Tensor skip = avg_pool(conv(h, b.skip, 2), 2, 2);
  return mul(add(y, skip), 1.0 / std::sqrt(2.0));
}

Tensor Discriminator::operator()(const Tensor& images, double alpha) const {
  if (images.rank() != 4 || images.size(1) != 3 || images.size(2) != images.size(3))
    throw ShapeError("discriminator expects [B, 3, r, r], got " + shape_str(images.shape()));
  const int res = static_cast<int>(images.size(2));
  const int top = level_of(res);
  const int bottom = static_cast<int>(blocks_.size());
  Tensor h = stem(images, top);
  if (top < bottom) {
    h = block(h, top);
    if (alpha < 1.0) {
      Tensor low = stem(avg_pool(images, 2, 2), top + 1);
      h = add(mul(h, alpha), mul(low, 1.0 - alpha));
    }
    for (int l = top + 1; l < bottom; ++l) h = block(h, l);
  }
  const std::int64_t b = images.size(0);
  h = reshape(h, {b, h.numel() / b});
  h = leaky_relu(linear(h, head_w1_, head_b1_));
  return reshape(linear(h, head_w2_, head_b2_), {b});
}

Tensor generator_loss(const Tensor& scores_fake) { return mean(softplus(neg(scores_fake))); }

Tensor discriminator_loss(const Tensor& scores_real, const Tensor& scores_fake) {
  return add(mean(softplus(neg(scores_real))), mean(softplus(scores_fake)));
}

LossPair logistic_losses(const Tensor& scores_real, const Tensor& scores_fake) {
  return {generator_loss(scores_fake), discriminator_loss(scores_real, scores_fake)};
}

Tensor r1_penalty(const std::function<Tensor(const Tensor&)>& d, const Tensor& real, Tape& tape,
                  Tensor* scores) {
  if (!recording_enabled() || active_tape() != &tape)
    throw Error("r1_penalty: gradient unavailable, the given tape is not recording");
  Tensor x = real.detach();
  x.requires_grad_();
  Tensor s = d(x);
  if (scores) *scores = s;
  const Tensor inputs[] = {x};
  Tensor g = grad(tape, sum(s), inputs, true)[0];
  return mul(sum(square(g)), 1.0 / static_cast<double>(real.size(0)));
}

}  // namespace vgan
