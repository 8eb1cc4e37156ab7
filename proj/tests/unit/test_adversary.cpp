#include <cmath>

#include "doctest.h"
#include "vgan/adversary/discriminator.hpp"
#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/trainer/adam.hpp"

using namespace vgan;

namespace {

Tensor t64(const std::vector<double>& v, Shape s) { return Tensor::from(v, std::move(s), DType::f64); }

double sp(double x) { return std::log1p(std::exp(x)); }

DiscriminatorConfig small_d() {
  DiscriminatorConfig c;
  c.max_res = 8;
  c.base_channels = 4;
  c.max_channels = 8;
  return c;
}

}  // namespace

TEST_CASE("logistic losses match direct softplus evaluation") {
  Tensor fake = t64({1, -1}, {2});
  CHECK(generator_loss(fake).item() == doctest::Approx(0.813262).epsilon(1e-6));
  CHECK(generator_loss(fake).item() == doctest::Approx((sp(-1) + sp(1)) / 2).epsilon(1e-14));
  Tensor real = t64({2.0, 0.5, -0.25}, {3});
  const double want = (sp(-2.0) + sp(-0.5) + sp(0.25)) / 3 + (sp(1) + sp(-1)) / 2;
  CHECK(discriminator_loss(real, fake).item() == doctest::Approx(want).epsilon(1e-14));
  LossPair p = logistic_losses(real, fake);
  CHECK(p.d_loss.item() == discriminator_loss(real, fake).item());
  // Overflow-safe for large scores.
  CHECK(std::isfinite(generator_loss(t64({-800.0}, {1})).item()));
  CHECK(generator_loss(t64({-800.0}, {1})).item() == doctest::Approx(800.0));
}

TEST_CASE("d_loss ignores batch order") {
  Rng rng(1);
  Discriminator d(small_d(), rng, DType::f64);
  Tensor real = randn({4, 3, 8, 8}, rng, 1.0, DType::f64);
  Tensor fake = randn({4, 3, 8, 8}, rng, 1.0, DType::f64);
  const double base = discriminator_loss(d(real), d(fake)).item();
  std::vector<Tensor> parts;
  for (int i : {2, 0, 3, 1}) parts.push_back(slice(real, 0, i, 1));
  const double perm = discriminator_loss(d(concat(parts, 0)), d(fake)).item();
  CHECK(perm == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("discriminator shapes across resolutions") {
  Rng rng(2);
  DiscriminatorConfig cfg;
  cfg.max_res = 32;
  cfg.base_channels = 16;
  cfg.max_channels = 64;
  Discriminator d(cfg, rng);
  CHECK(d.channels(32) == 16);
  CHECK(d.channels(16) == 32);
  CHECK(d.channels(4) == 64);
  for (int r : {32, 16, 8}) {
    Tensor s = d(randn({3, 3, r, r}, rng, 1.0, DType::f32), 0.5);
    CHECK(s.shape() == Shape{3});
    CHECK(all_finite(s));
  }
  CHECK_THROWS(d(randn({1, 3, 12, 12}, rng, 1.0, DType::f32)));
  CHECK_THROWS_AS(d(randn({1, 1, 8, 8}, rng, 1.0, DType::f32)), ShapeError);
}

TEST_CASE("R1 of a linear critic is the squared coefficient norm") {
  Rng rng(3);
  Tensor a = randn({1, 3, 4, 4}, rng, 1.0, DType::f64);
  double norm2 = 0;
  for (double v : a.values()) norm2 += v * v;
  auto critic = [&](const Tensor& x) { return sum(mul(x, a), {1, 2, 3}); };
  Tape tape;
  TapeScope scope(tape);
  Tensor real = randn({2, 3, 4, 4}, rng, 1.0, DType::f64);
  Tensor scores;
  Tensor pen = r1_penalty(critic, real, tape, &scores);
  CHECK(pen.item() == doctest::Approx(norm2).epsilon(1e-12));
  CHECK(scores.shape() == Shape{2});
  Tape other;
  CHECK_THROWS(r1_penalty(critic, real, other));
}

TEST_CASE("R1 matches finite differences on a real discriminator") {
  Rng rng(4);
  Discriminator d(small_d(), rng, DType::f64);
  Tensor real = randn({2, 3, 8, 8}, rng, 1.0, DType::f64);
  Tape tape;
  TapeScope scope(tape);
  auto critic = [&](const Tensor& x) { return d(x); };
  const double pen = r1_penalty(critic, real, tape).item();
  NoGradScope ng;
  double fd = 0;
  const double h = 1e-5;
  for (std::int64_t i = 0; i < real.numel(); ++i) {
    Tensor up = real.clone(), dn = real.clone();
    up.set_flat(i, real.flat(i) + h);
    dn.set_flat(i, real.flat(i) - h);
    const double g = (sum(d(up)).item() - sum(d(dn)).item()) / (2 * h);
    fd += g * g;
  }
  fd /= 2;
  CHECK(pen >= 0.0);
  CHECK(std::abs(pen - fd) / std::max(fd, 1e-12) < 1e-3);
}

TEST_CASE("R1 is differentiable in the critic parameters") {
  Rng rng(5);
  Discriminator d(small_d(), rng, DType::f64);
  Tensor real = randn({2, 3, 8, 8}, rng, 1.0, DType::f64);
  Tape tape;
  TapeScope scope(tape);
  Tensor pen = r1_penalty([&](const Tensor& x) { return d(x); }, real, tape);
  backward(tape, pen);
  int with_grad = 0;
  for (const auto& [name, p] : d.params())
    if (p.grad().defined()) ++with_grad;
  CHECK(with_grad > 0);
}

TEST_CASE("one discriminator step separates real from fake") {
  Rng rng(6);
  Discriminator d(small_d(), rng, DType::f64);
  Tensor real = add(randn({8, 3, 8, 8}, rng, 0.3, DType::f64), 0.5);
  Tensor fake = add(randn({8, 3, 8, 8}, rng, 0.3, DType::f64), -0.5);
  auto margin = [&] {
    NoGradScope ng;
    return mean(d(real)).item() - mean(d(fake)).item();
  };
  const double before = margin();
  Adam opt(d.params(), AdamConfig{1e-3, 0.0, 0.999, 1e-8});
  {
    Tape tape;
    TapeScope scope(tape);
    backward(tape, discriminator_loss(d(real), d(fake)));
  }
  opt.step();
  CHECK(margin() > before);
}
