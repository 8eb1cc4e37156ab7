#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vgan/diffcore/grad_check.hpp"
#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/nnlayers/layers.hpp"
#include "vgan/nnlayers/mapping.hpp"

using namespace vgan;

namespace {

Tensor random64(const Shape& s, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  return randn(s, rng, scale, DType::f64);
}

Tensor scalar64(double v) { return Tensor::scalar(v, DType::f64); }

}  // namespace

TEST_CASE("adain sets per-channel moments") {
  Tensor x = random64({2, 3, 8, 8}, 1, 2.5);
  x = add(x, 4.0);
  const std::vector<double> g{2.0, -0.5, 1.5, 0.25, 3.0, 1.0}, b{3.0, -1.0, 0.0, 2.0, 0.5, -4.0};
  Tensor y = adain(x, Tensor::from(g, {2, 3}, DType::f64), Tensor::from(b, {2, 3}, DType::f64));
  for (int i = 0; i < 6; ++i) {
    double m = 0, v = 0;
    for (int k = 0; k < 64; ++k) m += y.flat(i * 64 + k);
    m /= 64;
    for (int k = 0; k < 64; ++k) v += std::pow(y.flat(i * 64 + k) - m, 2);
    CHECK(std::abs(m - b[i]) < 1e-4);
    CHECK(std::abs(std::sqrt(v / 64) - std::abs(g[i])) < 1e-3);
  }
}

TEST_CASE("adain unbatched form") {
  Tensor x = random64({1, 64}, 2);
  Tensor y = adain(x, Tensor::from(std::vector<double>{2.0}, {1}, DType::f64),
                   Tensor::from(std::vector<double>{3.0}, {1}, DType::f64));
  double m = 0;
  for (double v : y.values()) m += v;
  CHECK(m / 64 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS(adain(x, Tensor::ones({2}, DType::f64), Tensor::ones({2}, DType::f64)));
}

TEST_CASE("film_siren closed form and range") {
  Tensor x = Tensor::from(std::vector<double>{std::numbers::pi / 4}, {1, 1}, DType::f64);
  Tensor w = Tensor::ones({1, 1}, DType::f64), b = Tensor::zeros({1}, DType::f64);
  Tensor y = film_siren(x, w, b, Tensor::full({1}, 2.0, DType::f64), Tensor::zeros({1}, DType::f64));
  CHECK(y.item() == doctest::Approx(1.0).epsilon(1e-15));

  Tensor xs = random64({2, 50, 7}, 3, 10.0);
  Tensor ws = random64({9, 7}, 4, 3.0), bs = random64({9}, 5);
  Tensor out = film_siren(xs, ws, bs, random64({2, 9}, 6, 15.0), random64({2, 9}, 7, 5.0));
  CHECK(out.shape() == Shape{2, 50, 9});
  for (double v : out.values()) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("modconv scalar examples") {
  Tensor x = random64({1, 1, 2, 3}, 8);
  Tensor w = Tensor::full({1, 1}, 2.0, DType::f64), s = Tensor::full({1, 1}, 3.0, DType::f64);
  Tensor y = modconv1x1(x, w, s, false);
  for (int i = 0; i < 6; ++i) CHECK(y.flat(i) == doctest::Approx(6.0 * x.flat(i)).epsilon(1e-14));
  Tensor yd = modconv1x1(x, w, s, true);
  const double k = 6.0 / std::sqrt(36.0 + 1e-8);
  for (int i = 0; i < 6; ++i) CHECK(yd.flat(i) == doctest::Approx(k * x.flat(i)).epsilon(1e-14));
}

TEST_CASE("modconv is per-pixel independent") {
  Tensor x = random64({2, 5, 4, 6}, 9);
  Tensor w = random64({3, 5}, 10), s = add(random64({2, 5}, 11, 0.2), 1.0);
  for (bool demod : {false, true}) {
    Tensor y = modconv1x1(x, w, s, demod);
    // Swap columns 1 and 4 of every row in the input; output must swap identically.
    Tensor xp = x.clone();
    for (std::int64_t p = 0; p < 2 * 5 * 4; ++p) {
      const double a = x.flat(p * 6 + 1), c = x.flat(p * 6 + 4);
      xp.set_flat(p * 6 + 1, c);
      xp.set_flat(p * 6 + 4, a);
    }
    Tensor yp = modconv1x1(xp, w, s, demod);
    for (std::int64_t p = 0; p < 2 * 3 * 4; ++p)
      for (int col = 0; col < 6; ++col) {
        const int src = col == 1 ? 4 : col == 4 ? 1 : col;
        CHECK(yp.flat(p * 6 + col) == y.flat(p * 6 + src));
      }
  }
}

TEST_CASE("layers pass grad_check") {
  constexpr double tol = 1e-4;
  Tensor x = random64({2, 3, 4, 2}, 20, 1.5);
  Tensor g = random64({2, 3}, 21), b = random64({2, 3}, 22);
  Tensor probe = random64({2, 3, 4, 2}, 23);
  CHECK(grad_check([&](const Tensor& t) { return sum(mul(adain(t, g, b), probe)); }, x, 1e-6) < tol);
  CHECK(grad_check([&](const Tensor& t) { return sum(mul(adain(x, t, b), probe)); }, g, 1e-6) < tol);
  CHECK(grad_check([&](const Tensor& t) { return sum(mul(adain(x, g, t), probe)); }, b, 1e-6) < tol);

  Tensor fx = random64({2, 4, 5}, 24), fw = random64({3, 5}, 25, 0.4), fb = random64({3}, 26, 0.1);
  Tensor fg = random64({2, 3}, 27, 1.5), fbeta = random64({2, 3}, 28);
  Tensor fprobe = random64({2, 4, 3}, 29);
  auto film = [&](const Tensor& xx, const Tensor& ww, const Tensor& gg) {
    return sum(mul(film_siren(xx, ww, fb, gg, fbeta), fprobe));
  };
  CHECK(grad_check([&](const Tensor& t) { return film(t, fw, fg); }, fx, 1e-6) < tol);
  CHECK(grad_check([&](const Tensor& t) { return film(fx, t, fg); }, fw, 1e-6) < tol);
  CHECK(grad_check([&](const Tensor& t) { return film(fx, fw, t); }, fg, 1e-6) < tol);

  Tensor mx = random64({2, 4, 2, 3}, 30), mw = random64({3, 4}, 31);
  Tensor ms = add(random64({2, 4}, 32, 0.2), 1.0), mprobe = random64({2, 3, 2, 3}, 33);
  for (bool demod : {false, true}) {
    INFO("demod " << demod);
    auto mc = [&](const Tensor& xx, const Tensor& ww, const Tensor& ss) {
      return sum(mul(modconv1x1(xx, ww, ss, demod), mprobe));
    };
    CHECK(grad_check([&](const Tensor& t) { return mc(t, mw, ms); }, mx, 1e-6) < tol);
    CHECK(grad_check([&](const Tensor& t) { return mc(mx, t, ms); }, mw, 1e-6) < tol);
    CHECK(grad_check([&](const Tensor& t) { return mc(mx, mw, t); }, ms, 1e-6) < tol);
  }
}

TEST_CASE("mapping produces one bundle per consumer") {
  ConditioningLayout layout{{6, 4}, {5, 5, 5}, {7}};
  MappingConfig cfg;
  cfg.latent_dim = 8;
  cfg.width = 16;
  cfg.depth = 2;
  Rng rng(40);
  MappingNetwork net(cfg, layout, rng, DType::f64);
  Rng zr(41);
  Tensor z = randn({3, 8}, zr, 1.0, DType::f64);
  Conditioning c = net(z);
  CHECK(c.bundle_count() == 6);
  CHECK(c.adain_gamma[0].shape() == Shape{3, 6});
  CHECK(c.adain_beta[1].shape() == Shape{3, 4});
  REQUIRE(c.film_gamma.size() == 3);
  for (const auto& t : c.film_gamma) {
    CHECK(t.shape() == Shape{3, 5});
    CHECK(all_finite(t));
  }
  CHECK(c.mod_scale[0].shape() == Shape{3, 7});
  for (double v : c.mod_scale[0].values()) CHECK(v > 0.0);
  // Frequencies start near the configured gamma0.
  double mean_gamma = 0;
  for (double v : c.film_gamma[0].values()) mean_gamma += v;
  mean_gamma /= static_cast<double>(c.film_gamma[0].numel());
  CHECK(std::abs(mean_gamma - 15.0) < 3.0);

  CHECK_THROWS(net(randn({3, 9}, zr, 1.0, DType::f64)));
}

TEST_CASE("mapping separates codes and latents") {
  ConditioningLayout layout{{6}, {5}, {7}};
  MappingConfig cfg;
  cfg.latent_dim = 8;
  cfg.width = 16;
  cfg.depth = 2;
  Rng rng(42);
  MappingNetwork net(cfg, layout, rng, DType::f64);
  Rng zr(43);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    Conditioning a = net(randn({1, 8}, zr, 1.0, DType::f64));
    Conditioning b = net(randn({1, 8}, zr, 1.0, DType::f64));
    if (!bit_equal(a.film_gamma[0], b.film_gamma[0])) ++differ;
  }
  CHECK(differ == 100);

  Tensor z1 = randn({2, 8}, zr, 1.0, DType::f64), z2 = randn({2, 8}, zr, 1.0, DType::f64);
  Conditioning tied = net(z1);
  Conditioning split = net(CodeBundle{z1, z1, z2});
  CHECK(bit_equal(tied.adain_gamma[0], split.adain_gamma[0]));
  CHECK(bit_equal(tied.film_beta[0], split.film_beta[0]));
  CHECK_FALSE(bit_equal(tied.mod_scale[0], split.mod_scale[0]));
}
