// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/evalkit/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/nnlayers/params.hpp"
#include "vgan/renderer/generator.hpp"

namespace vgan {

double MetricReport::get(const std::string& key) const {
  for (const auto& [k, v] : breakdown)
    if (k == key) return v;
  throw Error("metric report has no entry '" + key + "'");
}

void write_report_kv(const MetricReport& r, std::ostream& os) {
  os.precision(17);
  os << "metric=" << r.name << '\n' << "value=" << r.value << '\n' << "ok=" << (r.ok ? 1 : 0) << '\n';
  for (const auto& [k, v] : r.breakdown) os << k << '=' << v << '\n';
  for (const auto& [k, v] : r.provenance) os << "provenance." << k << '=' << v << '\n';
  if (!r.note.empty()) os << "note=" << r.note << '\n';
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["metric"] = r.name;
  j["value"] = r.value;
  j["ok"] = r.ok;
  auto& b = j["breakdown"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.breakdown) b[k] = v;
  auto& p = j["provenance"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.provenance) p[k] = v;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2);
}

void save_report(const MetricReport& r, const std::string& stem) {
  std::ofstream kv(stem + ".txt");
  std::ofstream js(stem + ".json");
  if (!kv || !js) throw Error("cannot write report '" + stem + "'");
  write_report_kv(r, kv);
  js << report_json(r) << '\n';
}

// ------------------------------------------------------------ Fréchet distance

namespace {

void fit_gaussian(const Eigen::MatrixXd& x, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
  mu = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - mu.transpose();
  cov = (c.transpose() * c) / static_cast<double>(std::max<Eigen::Index>(1, x.rows() - 1));
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ShapeError("frechet_distance: feature widths differ");
  if (a.rows() < 2 || b.rows() < 2) throw Error("frechet_distance: need at least two rows per set");
  if (!a.allFinite() || !b.allFinite()) throw NumericError("frechet_distance: non-finite features");
  const Eigen::Index d = a.cols();
  Eigen::VectorXd mu1, mu2;
  Eigen::MatrixXd s1, s2;
  fit_gaussian(a, mu1, s1);
  fit_gaussian(b, mu2, s2);
  auto ridge = [d](Eigen::MatrixXd& s, Eigen::Index rows) {
    if (rows >= d + 1) return;
    const double eps = 1e-6 * s.trace() / static_cast<double>(d);
    s.diagonal().array() += eps > 0.0 ? eps : 1e-12;
  };
  ridge(s1, a.rows());
  ridge(s2, b.rows());
  const Eigen::MatrixXd r1 = sqrt_psd(s1);
  const Eigen::MatrixXd m = r1 * s2 * r1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double fd = (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
  if (fd < 0.0 && fd > -1e-6) return 0.0;
  return fd;
}

RandomFeatureExtractor::RandomFeatureExtractor(std::uint64_t seed, int width) : width_(width) {
  Rng rng(seed);
  w1_ = init_fan_in_normal({width, 3, 3, 3}, 27, std::sqrt(2.0), rng, DType::f64);
  w2_ = init_fan_in_normal({2 * width, width, 3, 3}, 9 * width, std::sqrt(2.0), rng, DType::f64);
  w1_.requires_grad_(false);
  w2_.requires_grad_(false);
}

int RandomFeatureExtractor::dim() const { return 6 + 6 * width_; }

Eigen::MatrixXd RandomFeatureExtractor::operator()(const Tensor& images) const {
  if (images.rank() != 4 || images.size(1) != 3 || images.size(2) != images.size(3))
    throw ShapeError("feature extractor expects [B, 3, R, R], got " + shape_str(images.shape()));
  NoGradScope ng;
  Tensor x = images.detach().to(DType::f64);
  std::int64_t r = x.size(2);
  while (r > 16) {
    x = avg_pool(x, 2, 2);
    r /= 2;
  }
  while (r < 16) {
    x = upsample_nearest(x, 2, 2);
    r *= 2;
  }
  const std::int64_t b = x.size(0);
  Tensor h1 = leaky_relu(conv(x, w1_, 2));
  Tensor h2 = leaky_relu(conv(avg_pool(h1, 2, 2), w2_, 2));
  Eigen::MatrixXd f(b, dim());
  auto pooled = [&](const Tensor& t, Eigen::Index col0) {
    const std::int64_t c = t.size(1), plane = t.size(2) * t.size(3);
    for (std::int64_t i = 0; i < b; ++i)
      for (std::int64_t k = 0; k < c; ++k) {
        double s = 0.0, s2 = 0.0;
        for (std::int64_t p = 0; p < plane; ++p) {
          const double v = t.flat((i * c + k) * plane + p);
          s += v;
          s2 += v * v;
        }
        const double mean = s / plane;
        f(i, col0 + k) = mean;
        f(i, col0 + c + k) = std::sqrt(std::max(0.0, s2 / plane - mean * mean));
      }
    return col0 + 2 * c;
  };
  Eigen::Index col = pooled(x, 0);
  col = pooled(h1, col);
  pooled(h2, col);
  return f;
}

// ------------------------------------------------------------------ pose error

std::vector<std::pair<long, PoseAngles>> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions file '" + path + "'");
  std::vector<std::pair<long, PoseAngles>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream is(line);
    long id;
    PoseAngles p;
    if (!(is >> id >> p.yaw_deg >> p.pitch_deg))
      throw Error(path + ":" + std::to_string(lineno) + ": expected 'id yaw_deg pitch_deg'");
    out.emplace_back(id, p);
  }
  return out;
}

MetricReport pose_error(const std::vector<PoseAngles>& given,
                        const std::vector<PoseAngles>& predicted) {
  if (given.size() != predicted.size())
    throw Error("pose_error: " + std::to_string(given.size()) + " given poses vs " +
                std::to_string(predicted.size()) + " predictions");
  if (given.empty()) throw Error("pose_error: no samples");
  MetricReport r;
  r.name = "pose_error";
  double total = 0.0;
  for (std::size_t i = 0; i < given.size(); ++i) {
    const double e = std::abs(given[i].yaw_deg - predicted[i].yaw_deg) +
                     std::abs(given[i].pitch_deg - predicted[i].pitch_deg);
    r.breakdown.emplace_back("sample" + std::to_string(i), e);
    total += e;
  }
  r.value = total / static_cast<double>(given.size());
  r.provenance.emplace_back("unit", "degrees");
  r.provenance.emplace_back("samples", std::to_string(given.size()));
  return r;
}

// ---------------------------------------------------------- reprojection error

std::vector<CameraPose> reprojection_poses(const ReprojectionConfig& cfg, double radius) {
  if (cfg.views < 2) throw Error("reprojection needs at least two views");
  std::vector<CameraPose> poses;
  for (int i = 0; i < cfg.views; ++i) {
    const double pitch = cfg.pitch_lo + (cfg.pitch_hi - cfg.pitch_lo) * i / (cfg.views - 1);
    poses.push_back(CameraPose::from_yaw_pitch(cfg.yaw, pitch, radius));
  }
  return poses;
}

namespace {

struct Bilinear {
  int c0, r0;
  double fc, fr;
};

// Valid when all four neighbours are hits whose depth is within tol of `dist`.
std::optional<Bilinear> visible_at(const DepthMap& d, double col, double row, double dist,
                                   double tol) {
  const int c0 = static_cast<int>(std::floor(col)), r0 = static_cast<int>(std::floor(row));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= d.width || r0 + 1 >= d.height) return std::nullopt;
  for (int dr = 0; dr < 2; ++dr)
    for (int dc = 0; dc < 2; ++dc) {
      const double v = d.at(r0 + dr, c0 + dc);
      if (v == kNoHit || std::abs(v - dist) > tol) return std::nullopt;
    }
  return Bilinear{c0, r0, col - c0, row - r0};
}

template <class F>
double lerp2(const Bilinear& b, F&& at) {
  const double v00 = at(b.r0, b.c0), v01 = at(b.r0, b.c0 + 1);
  const double v10 = at(b.r0 + 1, b.c0), v11 = at(b.r0 + 1, b.c0 + 1);
  return (1 - b.fr) * ((1 - b.fc) * v00 + b.fc * v01) + b.fr * ((1 - b.fc) * v10 + b.fc * v11);
}

struct DirectedWarp {
  double intensity = 0.0, coordinate = 0.0;
  std::int64_t pixels = 0;
};

DirectedWarp warp_one(const RenderedView& a, const RenderedView& b, const CameraConfig& cam,
                      double tol) {
  const int h = a.depth.height, w = a.depth.width;
  const auto ia = a.image.values(), ib = b.image.values();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const Eigen::Vector3d oa = a.depth.pose.position(), ob = b.depth.pose.position();
  DirectedWarp out;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double da = a.depth.at(r, c);
      if (da == kNoHit) continue;
      const Eigen::Vector3d x = oa + da * pixel_direction(a.depth.pose, cam, h, w, c, r);
      const auto pb = project(b.depth.pose, cam, h, w, x);
      if (!pb) continue;
      const auto bl = visible_at(b.depth, pb->col, pb->row, pb->distance, tol);
      if (!bl) continue;
      double di = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double sampled = lerp2(*bl, [&](int rr, int cc) {
          return ib[ch * plane + static_cast<std::size_t>(rr) * w + cc];
        });
        di += std::abs(ia[ch * plane + static_cast<std::size_t>(r) * w + c] - sampled);
      }
      // Round trip: b's interpolated depth carries the point back into a.
      const double db = lerp2(*bl, [&](int rr, int cc) { return b.depth.at(rr, cc); });
      const Eigen::Vector3d y =
          ob + db * pixel_direction(b.depth.pose, cam, h, w, pb->col, pb->row);
      const auto back = project(a.depth.pose, cam, h, w, y);
      if (!back) continue;
      const double dc = std::abs(back->col - c) * 2.0 / w;
      const double dr = std::abs(back->row - r) * 2.0 / h;
      out.intensity += di / 3.0;
      out.coordinate += 0.5 * (dc + dr);
      ++out.pixels;
    }
  return out;
}

}  // namespace

PairWarp warp_pair(const RenderedView& a, const RenderedView& b, const CameraConfig& cam,
                   double occlusion_tol) {
  for (const RenderedView* v : {&a, &b})
    if (v->image.shape() != Shape{3, v->depth.height, v->depth.width})
      throw ShapeError("reprojection: image " + shape_str(v->image.shape()) +
                       " does not match its depth map");
  const DirectedWarp ab = warp_one(a, b, cam, occlusion_tol);
  const DirectedWarp ba = warp_one(b, a, cam, occlusion_tol);
  PairWarp p;
  p.pixels = ab.pixels + ba.pixels;
  if (p.pixels > 0) {
    p.intensity = (ab.intensity + ba.intensity) / static_cast<double>(p.pixels);
    p.coordinate = (ab.coordinate + ba.coordinate) / static_cast<double>(p.pixels);
  }
  return p;
}

MetricReport reprojection_error(const std::vector<RenderedView>& views, const CameraConfig& cam,
                                const ReprojectionConfig& cfg) {
  MetricReport r;
  r.name = "reprojection_error";
  r.provenance.emplace_back("headline", "intensity");
  r.provenance.emplace_back("space", "normalized [-1,1]");
  r.provenance.emplace_back("views", std::to_string(views.size()));
  r.provenance.emplace_back("occlusion_tol", std::to_string(cfg.occlusion_tol));
  if (views.size() < 2) {
    r.ok = false;
    r.note = "fewer than two views";
    return r;
  }
  double inten = 0.0, coord = 0.0;
  for (std::size_t i = 0; i + 1 < views.size(); ++i) {
    const PairWarp p = warp_pair(views[i], views[i + 1], cam, cfg.occlusion_tol);
    const std::string tag = "pair" + std::to_string(i);
    r.breakdown.emplace_back(tag + ".intensity", p.intensity);
    r.breakdown.emplace_back(tag + ".coordinate", p.coordinate);
    r.breakdown.emplace_back(tag + ".pixels", static_cast<double>(p.pixels));
    if (p.pixels == 0) {
      r.ok = false;
      r.note = "no co-visible pixels in " + tag;
    }
    inten += p.intensity;
    coord += p.coordinate;
  }
  const double pairs = static_cast<double>(views.size() - 1);
  r.value = inten / pairs;
  r.breakdown.emplace_back("intensity", inten / pairs);
  r.breakdown.emplace_back("coordinate", coord / pairs);
  return r;
}

MetricReport reprojection_error(const Generator& g, const CodeBundle& codes,
                                const ReprojectionConfig& cfg) {
  const CameraConfig& cam = g.config().camera;
  const Mesh mesh = extract_mesh(g, codes, cfg.grid_res, cfg.threshold);
  if (mesh.empty()) {
    MetricReport r;
    r.name = "reprojection_error";
    r.ok = false;
    r.note = "extracted mesh is empty at threshold " + std::to_string(cfg.threshold);
    return r;
  }
  const auto poses = reprojection_poses(cfg, cam.radius);
  const int res = g.output_res();
  std::vector<RenderedView> views;
  NoGradScope ng;
  for (const auto& pose : poses) {
    RenderRequest req;
    req.poses = {pose};
    const Tensor img = g.forward(codes, req).image;
    views.push_back({img.alias({3, res, res}), render_mesh_depth(mesh, pose, cam, res, res)});
  }
  MetricReport r = reprojection_error(views, cam, cfg);
  r.provenance.emplace_back("mesh_triangles", std::to_string(mesh.triangles.size()));
  r.provenance.emplace_back("grid_res", std::to_string(cfg.grid_res));
  return r;
}

}  // namespace vgan
