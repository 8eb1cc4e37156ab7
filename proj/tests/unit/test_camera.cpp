#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vgan/camera/camera.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tensor.hpp"

using namespace vgan;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("config validation") {
  CameraConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    CameraConfig k;
    mutate(k);
    CHECK_THROWS_AS(k.validate(), Error);
  };
  bad([](CameraConfig& k) { k.near = 1.2; });
  bad([](CameraConfig& k) { k.n_steps = 1; });
  bad([](CameraConfig& k) { k.h_hi = 7.0; });
  bad([](CameraConfig& k) { k.v_lo = -0.1; });
  bad([](CameraConfig& k) { k.fov_deg = 0.0; });
  bad([](CameraConfig& k) { std::swap(k.h_lo, k.h_hi); });
}

TEST_CASE("uniform yaw over the full circle is unbiased") {
  CameraConfig c;
  c.dist = SampleDist::uniform;
  c.h_lo = 0.0;
  c.h_hi = 2 * kPi;
  Rng rng(1);
  const int n = 10000;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double h = sample_pose(c, rng).theta_h;
    CHECK((h >= 0.0 && h <= 2 * kPi));
    s += h;
  }
  const double se = (2 * kPi / std::sqrt(12.0)) / std::sqrt(n);
  CHECK(std::abs(s / n - kPi) < 3 * se);
}

TEST_CASE("gaussian samples stay in the clamp interval") {
  CameraConfig c;  // gaussian, mean pi/2, half-width 0.3 / 0.15
  Rng rng(2);
  for (int i = 0; i < 20000; ++i) {
    const CameraPose p = sample_pose(c, rng);
    CHECK(std::abs(p.theta_h - kPi / 2) <= 0.6 + 1e-12);
    CHECK(std::abs(p.theta_v - kPi / 2) <= 0.3 + 1e-12);
  }
}

TEST_CASE("pose rotation is a proper rotation looking at the origin") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    CameraPose p{rng.uniform(0, 2 * kPi), rng.uniform(0.05, kPi - 0.05), rng.uniform(0.5, 3.0)};
    const Eigen::Matrix3d r = p.rotation();
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.position().norm() == doctest::Approx(p.radius));
    const Eigen::Vector3d fwd = -r.col(2);
    CHECK((fwd + p.position().normalized()).norm() < 1e-9);
  }
  const CameraPose front = CameraPose::from_yaw_pitch(0.0, 0.0);
  CHECK((front.position() - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
  CHECK(front.yaw() == doctest::Approx(0.0));
  CHECK(CameraPose::from_yaw_pitch(0.3, -0.2).pitch() == doctest::Approx(-0.2));
}

TEST_CASE("ray directions are unit and the corner angle matches the pinhole model") {
  CameraConfig c;
  c.fov_deg = 12.0;
  const CameraPose p = CameraPose::from_yaw_pitch(0.4, 0.1);
  const RayGrid g = generate_rays(p, c, 8, 8);
  CHECK(g.size() == 64);
  for (const auto& d : g.directions) CHECK(std::abs(d.norm() - 1.0) < 1e-6);
  const Eigen::Vector3d axis = -p.position().normalized();
  const Eigen::Vector3d corner = pixel_direction(p, c, 8, 8, -0.5, -0.5);
  const double angle = std::acos(std::clamp(corner.dot(axis), -1.0, 1.0)) * 180.0 / kPi;
  CHECK(angle == doctest::Approx(8.45).epsilon(1e-3));
  CHECK(angle == doctest::Approx(std::atan(std::sqrt(2.0) * std::tan(6.0 * kPi / 180.0)) * 180.0 / kPi)
                     .epsilon(1e-12));
  // Top-left pixel looks up and left in camera space.
  const Eigen::Vector3d cam = p.rotation().transpose() * g.directions[0];
  CHECK(cam.x() < 0);
  CHECK(cam.y() > 0);
  CHECK_THROWS(generate_rays(p, c, 0, 4));
}

TEST_CASE("depth samples stay ordered within range") {
  CameraConfig c;  // 12 steps in [0.88, 1.12]
  const auto mid = sample_depths(c, false, nullptr);
  REQUIRE(mid.size() == 12);
  CHECK(mid.front() == doctest::Approx(0.88 + 0.01));
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = sample_depths(c, true, &rng);
    REQUIRE(t.size() == 12);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK((t[k] >= 0.88 && t[k] <= 1.12));
      if (k) CHECK(t[k] > t[k - 1]);
    }
  }
  CHECK_THROWS(sample_depths(c, true, nullptr));
}

TEST_CASE("projection inverts ray generation") {
  CameraConfig c;
  c.fov_deg = 30.0;
  const CameraPose p = CameraPose::from_yaw_pitch(-0.3, 0.25, 1.5);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double col = rng.uniform(-0.5, 15.5), row = rng.uniform(-0.5, 11.5);
    const double t = rng.uniform(0.5, 2.0);
    const Eigen::Vector3d x = p.position() + t * pixel_direction(p, c, 12, 16, col, row);
    const auto pr = project(p, c, 12, 16, x);
    REQUIRE(pr.has_value());
    CHECK(pr->col == doctest::Approx(col).epsilon(1e-9));
    CHECK(pr->row == doctest::Approx(row).epsilon(1e-9));
    CHECK(pr->distance == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK_FALSE(project(p, c, 12, 16, 2.0 * p.position()).has_value());
}
