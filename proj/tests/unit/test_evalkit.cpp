#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "vgan/diffcore/ops.hpp"
#include "vgan/evalkit/depth.hpp"
#include "vgan/evalkit/marching_cubes.hpp"
#include "vgan/evalkit/metrics.hpp"

using namespace vgan;
namespace fs = std::filesystem;

namespace {

double ball(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z) < 0.5 ? 20.0 : 0.0; }

Eigen::MatrixXd gaussian_rows(int n, const Eigen::VectorXd& mean, const Eigen::MatrixXd& mix, Rng& rng) {
  Eigen::MatrixXd out(n, mean.size());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e(mean.size());
    for (int k = 0; k < e.size(); ++k) e[k] = rng.normal();
    out.row(i) = (mean + mix * e).transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("marching cubes recovers the analytic ball") {
  const ScalarGrid grid = sample_grid(64, ball);
  CHECK(grid.values.size() == 64u * 64u * 64u);
  const Mesh m = marching_cubes(grid, kDefaultIsoThreshold);
  REQUIRE_FALSE(m.empty());
  double worst = 0;
  for (const auto& v : m.vertices) worst = std::max(worst, std::abs(v.norm() - 0.5));
  CHECK(worst < 2.0 / 64);
  CHECK_NOTHROW(validate_mesh(m));
  for (const auto& t : m.triangles)
    for (int i : t) CHECK((i >= 0 && i < static_cast<int>(m.vertices.size())));
}

TEST_CASE("empty and full fields yield no surface") {
  CHECK(marching_cubes(sample_grid(16, [](double, double, double) { return 0.0; }), 10.0).empty());
  CHECK(marching_cubes(sample_grid(16, [](double, double, double) { return 50.0; }), 10.0).empty());
  CHECK(kDefaultIsoThreshold == 10.0);
}

TEST_CASE("vertex count does not grow with the threshold") {
  auto smooth = [](double x, double y, double z) { return 40.0 * std::exp(-(x * x + y * y + z * z) / 0.15); };
  const ScalarGrid grid = sample_grid(40, smooth);
  std::size_t prev = SIZE_MAX;
  for (double iso : {1.0, 5.0, 10.0, 20.0, 35.0, 45.0}) {
    const std::size_t n = marching_cubes(grid, iso).vertices.size();
    CHECK(n <= prev);
    prev = n;
  }
  CHECK(prev == 0);
}

TEST_CASE("mesh depth of a sphere matches ray-sphere intersection") {
  const Mesh sphere = make_sphere(Eigen::Vector3d::Zero(), 0.3, 5);
  CameraConfig cam;
  cam.fov_deg = 30.0;
  cam.near = 0.2;
  cam.far = 2.0;
  const CameraPose pose = CameraPose::from_yaw_pitch(0.3, 0.2);
  const DepthMap d = render_mesh_depth(sphere, pose, cam, 33, 33);
  CHECK(d.at(16, 16) == doctest::Approx(0.7).epsilon(5e-3));
  int hits = 0;
  for (int r = 0; r < 33; ++r)
    for (int c = 0; c < 33; ++c) {
      if (!d.hit(r, c)) continue;
      ++hits;
      CHECK((d.at(r, c) >= cam.near && d.at(r, c) <= cam.far));
      const Eigen::Vector3d dir = pixel_direction(pose, cam, 33, 33, c, r);
      const Eigen::Vector3d o = pose.position();
      const double b = o.dot(dir), disc = b * b - (o.squaredNorm() - 0.09);
      if (disc > 1e-3) CHECK(std::abs(d.at(r, c) - (-b - std::sqrt(disc))) < 5e-3);
    }
  CHECK(hits > 100);
  CameraConfig shallow = cam;
  shallow.far = 0.6;  // the whole sphere lies beyond the far plane
  const DepthMap none = render_mesh_depth(sphere, pose, shallow, 9, 9);
  CHECK(std::all_of(none.depth.begin(), none.depth.end(), [](double v) { return v == kNoHit; }));
}

TEST_CASE("mesh depth ignores triangle order") {
  Mesh m = make_sphere({0.1, 0, 0}, 0.25, 3);
  m.append(make_box({-0.15, 0.05, 0.1}, {0.2, 0.1, 0.15}));
  CameraConfig cam;
  cam.fov_deg = 40.0;
  cam.near = 0.2;
  cam.far = 2.0;
  const CameraPose pose = CameraPose::from_yaw_pitch(-0.4, 0.25);
  const DepthMap a = render_mesh_depth(m, pose, cam, 24, 24);
  Mesh shuffled = m;
  Rng rng(3);
  for (std::size_t i = shuffled.triangles.size() - 1; i > 0; --i)
    std::swap(shuffled.triangles[i], shuffled.triangles[rng.below(i + 1)]);
  const DepthMap b = render_mesh_depth(shuffled, pose, cam, 24, 24);
  CHECK(a.depth == b.depth);
}

TEST_CASE("ray-triangle intersection") {
  const Eigen::Vector3d v0(0, 0, 0), v1(1, 0, 0), v2(0, 1, 0);
  auto t = intersect_triangle({0.2, 0.2, 1}, {0, 0, -1}, v0, v1, v2);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(1.0));
  CHECK_FALSE(intersect_triangle({0.8, 0.8, 1}, {0, 0, -1}, v0, v1, v2).has_value());
  CHECK_FALSE(intersect_triangle({0.2, 0.2, 1}, {0, 0, 1}, v0, v1, v2).has_value());
}

TEST_CASE("reprojection error on exact geometry and under depth noise") {
  const SyntheticSceneConfig scene = testing::reprojection_scene();
  const std::vector<Primitive> prims{
      {Primitive::Kind::sphere, {0.0, 0.0, 0.0}, Eigen::Vector3d::Constant(0.3), {0.8, 0.3, 0.2}},
      {Primitive::Kind::box, {0.25, -0.1, 0.25}, {0.1, 0.12, 0.08}, {0.2, 0.6, 0.9}}};
  ReprojectionConfig rc;
  const auto exact = testing::ground_truth_views(prims, scene, rc, 48);
  const MetricReport r = reprojection_error(exact, scene.camera, rc);
  CHECK(r.ok);
  CHECK(r.value < 1e-2);
  CHECK(r.get("coordinate") < 1e-2);
  int pairs = 0;
  for (const auto& [k, v] : r.breakdown)
    if (k.find(".intensity") != std::string::npos) ++pairs;
  CHECK(pairs == 4);
  double prev = r.value;
  for (double amp : {0.01, 0.03, 0.1}) {
    const double e = reprojection_error(testing::ground_truth_views(prims, scene, rc, 48, amp), scene.camera, rc).value;
    CHECK(e > prev);
    prev = e;
  }
  const auto poses = reprojection_poses(rc, 1.0);
  REQUIRE(poses.size() == 5);
  CHECK(poses.front().pitch() == doctest::Approx(-0.3));
  CHECK(poses.back().pitch() == doctest::Approx(0.3));
  CHECK(poses[2].yaw() == doctest::Approx(0.0));
  CHECK_FALSE(reprojection_error(std::vector<RenderedView>(exact.begin(), exact.begin() + 1), scene.camera, rc).ok);
}

TEST_CASE("frechet distance closed forms") {
  Rng rng(5);
  Eigen::MatrixXd mix = Eigen::MatrixXd::Random(4, 4);
  Eigen::VectorXd mu = Eigen::VectorXd::Random(4);
  Eigen::MatrixXd a = gaussian_rows(300, mu, mix, rng);
  CHECK(std::abs(frechet_distance(a, a)) < 1e-6);

  Eigen::RowVectorXd delta(4);
  delta << 0.5, -1.0, 2.0, 0.25;
  Eigen::MatrixXd shifted = a.rowwise() + delta;
  CHECK(frechet_distance(a, shifted) == doctest::Approx(delta.squaredNorm()).epsilon(1e-6));

  // One dimension: (m1 - m2)^2 + (s1 - s2)^2 with unbiased standard deviations.
  Eigen::MatrixXd x(5, 1), y(4, 1);
  x << 1, 2, 4, 7, 11;
  y << -1, 0.5, 3, 2;
  auto stats = [](const Eigen::MatrixXd& m) {
    const double mean = m.mean();
    const double var = (m.array() - mean).square().sum() / static_cast<double>(m.rows() - 1);
    return std::pair{mean, std::sqrt(var)};
  };
  const auto [m1, s1] = stats(x);
  const auto [m2, s2] = stats(y);
  CHECK(std::abs(frechet_distance(x, y) - ((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2))) < 1e-8);

  Eigen::MatrixXd b = gaussian_rows(250, Eigen::VectorXd::Random(4), Eigen::MatrixXd::Random(4, 4), rng);
  const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
  CHECK(std::abs(ab - ba) < 1e-8);
  CHECK(ab >= 0.0);
  // Fewer rows than dimensions still gives a finite answer via the ridge.
  CHECK(std::isfinite(frechet_distance(a.topRows(3), b.topRows(2))));
  CHECK_THROWS(frechet_distance(a, b.leftCols(3)));
}

TEST_CASE("bundled feature extractor is deterministic and sized") {
  RandomFeatureExtractor fx;
  CHECK(fx.dim() == 198);
  Rng rng(6);
  Tensor imgs = rand_uniform({3, 3, 32, 32}, rng, -1, 1, DType::f32);
  const Eigen::MatrixXd f1 = fx(imgs), f2 = RandomFeatureExtractor()(imgs);
  CHECK(f1.rows() == 3);
  CHECK(f1.cols() == 198);
  CHECK((f1 - f2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fx(rand_uniform({2, 3, 8, 8}, rng, -1, 1, DType::f32)).cols() == 198);
}

TEST_CASE("pose error ingestion") {
  const fs::path p = fs::temp_directory_path() / "vgan_pred.txt";
  {
    std::ofstream f(p);
    f << "# id yaw pitch\n0 10 2\n\n1 -5.5 0\n";
  }
  const auto pred = read_predictions(p.string());
  REQUIRE(pred.size() == 2);
  CHECK(pred[1].first == 1);
  CHECK(pred[1].second.yaw_deg == -5.5);
  const MetricReport r = pose_error({{10, 0}, {-5.5, 0}}, {pred[0].second, pred[1].second});
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(pose_error({{0, 0}}, {{0, 2}}).value == doctest::Approx(2.0));
  CHECK_THROWS(pose_error({{0, 0}}, {}));
  {
    std::ofstream f(p);
    f << "0 10\n";
  }
  CHECK_THROWS(read_predictions(p.string()));
  CHECK_THROWS(read_predictions("/nonexistent/pred.txt"));
}

TEST_CASE("metric reports serialize as key=value and json") {
  MetricReport r;
  r.name = "demo";
  r.value = 0.5;
  r.breakdown = {{"pair0.intensity", 0.25}};
  r.provenance = {{"headline", "intensity"}};
  std::ostringstream os;
  write_report_kv(r, os);
  CHECK(os.str().find("metric=demo\n") != std::string::npos);
  CHECK(os.str().find("pair0.intensity=0.25\n") != std::string::npos);
  const std::string js = report_json(r);
  CHECK(js.find("\"pair0.intensity\"") != std::string::npos);
  CHECK(r.get("pair0.intensity") == 0.25);
  const fs::path stem = fs::temp_directory_path() / "vgan_report";
  save_report(r, stem.string());
  CHECK(fs::exists(stem.string() + ".txt"));
  CHECK(fs::exists(stem.string() + ".json"));
}

TEST_CASE("generator mesh extraction degrades gracefully") {
  Rng rng(7);
  Generator g(testing::tiny_generator_config(DType::f32), rng);
  Tensor z = sample_latent(1, 4, rng, DType::f32);
  const Mesh m = extract_mesh(g, CodeBundle::tied(z), 12, 1e9);
  CHECK(m.empty());
  ReprojectionConfig rc;
  rc.grid_res = 12;
  rc.threshold = 1e9;
  const MetricReport r = reprojection_error(g, CodeBundle::tied(z), rc);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.note.empty());
  CHECK_THROWS(extract_mesh(g, CodeBundle::tied(z), 4));
}
