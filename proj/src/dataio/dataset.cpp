// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/dataio/dataset.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace vgan {

namespace fs = std::filesystem;

void ImageDataset::push_back(const Tensor& chw) {
  if (chw.shape() != Shape{3, resolution_, resolution_})
    throw ShapeError("dataset expects [3, " + std::to_string(resolution_) + ", " +
                     std::to_string(resolution_) + "], got " + shape_str(chw.shape()));
  for (double v : chw.values()) data_.push_back(static_cast<float>(v));
  ++count_;
}

Tensor ImageDataset::at(std::size_t i, DType dtype) const {
  if (i >= count_) throw Error("dataset index out of range");
  std::vector<float> v(raw(i), raw(i) + plane());
  Tensor t = Tensor::adopt(std::move(v), {3, resolution_, resolution_});
  return dtype == DType::f32 ? t : t.to(dtype);
}

ImageDataset load_folder(const DatasetSpec& spec, std::ostream* warnings) {
  if (spec.resolution <= 0 || (spec.resolution & (spec.resolution - 1)))
    throw Error("dataset resolution must be a power of two");
  if (!fs::is_directory(spec.path)) throw Error("'" + spec.path + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(spec.path))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  ImageDataset ds(spec.resolution);
  for (const auto& f : files) {
    try {
      Image img = read_image(f.string());
      if (spec.center_crop) img = center_crop(img);
      ds.push_back(image_to_tensor(area_resize(img, spec.resolution)));
    } catch (const Error& e) {
      if (warnings) *warnings << "warning: skipping " << f.string() << ": " << e.what() << '\n';
    }
  }
  if (ds.size() == 0) throw Error("no decodable images in '" + spec.path + "'");
  return ds;
}

namespace {

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d normal;
  const Primitive* prim = nullptr;
};

void intersect_sphere(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                      Hit& hit) {
  const Eigen::Vector3d oc = o - p.center;
  const double r = p.size.x();
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - r * r;
  const double disc = b * b - c;
  if (disc < 0) return;
  const double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t <= 1e-9) t = -b + sq;
  if (t <= 1e-9 || t >= hit.t) return;
  hit.t = t;
  hit.normal = (o + t * d - p.center).normalized();
  hit.prim = &p;
}

void intersect_box(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                   Hit& hit) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  int axis_min = 0;
  double sign_min = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = p.center[a] - p.size[a], hi = p.center[a] + p.size[a];
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo || o[a] > hi) return;
      continue;
    }
    double t0 = (lo - o[a]) / d[a], t1 = (hi - o[a]) / d[a];
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > tmin) {
      tmin = t0;
      axis_min = a;
      sign_min = s;
    }
    tmax = std::min(tmax, t1);
  }
  if (tmin > tmax || tmin <= 1e-9 || tmin >= hit.t) return;
  hit.t = tmin;
  hit.normal = Eigen::Vector3d::Zero();
  hit.normal[axis_min] = sign_min;
  hit.prim = &p;
}

std::uint8_t to_byte(double v01) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v01 * 255.0), 0.0, 255.0));
}

}  // namespace

SceneRender render_scene(const std::vector<Primitive>& primitives, const CameraPose& pose,
                         const SyntheticSceneConfig& cfg, int height, int width) {
  const RayGrid rays = generate_rays(pose, cfg.camera, height, width);
  SceneRender out;
  out.image.width = width;
  out.image.height = height;
  out.image.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  out.depth.assign(rays.size(), -1.0);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    Hit hit;
    for (const auto& p : primitives) {
      if (p.kind == Primitive::Kind::sphere)
        intersect_sphere(p, rays.origin, rays.directions[i], hit);
      else
        intersect_box(p, rays.origin, rays.directions[i], hit);
    }
    Eigen::Vector3d c = cfg.background;
    if (hit.prim) {
      out.depth[i] = hit.t;
      const double lambert = std::max(0.0, hit.normal.dot(cfg.light_dir));
      c = hit.prim->color * (cfg.ambient + (1.0 - cfg.ambient) * lambert);
    }
    for (int ch = 0; ch < 3; ++ch) out.image.rgb[i * 3 + ch] = to_byte(c[ch]);
  }
  return out;
}

std::vector<Primitive> sample_scene(const SyntheticSceneConfig& cfg, Rng& rng) {
  std::vector<Primitive> prims;
  Primitive main;
  main.kind = rng.uniform() < 0.5 ? Primitive::Kind::sphere : Primitive::Kind::box;
  main.center = Eigen::Vector3d(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08),
                                rng.uniform(-0.08, 0.08));
  if (main.kind == Primitive::Kind::sphere) {
    const double r = rng.uniform(0.22, 0.36);
    main.size = Eigen::Vector3d::Constant(r);
  } else {
    main.size = Eigen::Vector3d(rng.uniform(0.15, 0.28), rng.uniform(0.15, 0.28),
                                rng.uniform(0.15, 0.28));
  }
  main.color = Eigen::Vector3d(rng.uniform(0.25, 1.0), rng.uniform(0.25, 1.0), rng.uniform(0.25, 1.0));
  prims.push_back(main);
  if (rng.uniform() < cfg.second_prob) {
    Primitive s;
    s.kind = Primitive::Kind::sphere;
    const double r = rng.uniform(0.07, 0.13);
    s.size = Eigen::Vector3d::Constant(r);
    // On a ring around the main primitive, kept inside the ±0.6 cube.
    const double a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double reach = 0.36 + r;
    s.center = main.center + Eigen::Vector3d(reach * std::cos(a), rng.uniform(-0.15, 0.15), reach * std::sin(a));
    for (int k = 0; k < 3; ++k) s.center[k] = std::clamp(s.center[k], -0.6 + r, 0.6 - r);
    s.color = Eigen::Vector3d(rng.uniform(0.25, 1.0), rng.uniform(0.25, 1.0), rng.uniform(0.25, 1.0));
    prims.push_back(s);
  }
  return prims;
}

SyntheticDataset generate_synthetic(const SyntheticSceneConfig& cfg) {
  cfg.camera.validate();
  SyntheticDataset ds;
  ds.config = cfg;
  ds.images = ImageDataset(cfg.resolution);
  Rng rng(cfg.seed);
  for (int i = 0; i < cfg.count; ++i) {
    SyntheticRecord rec;
    rec.primitives = sample_scene(cfg, rng);
    rec.pose = sample_pose(cfg.camera, rng);
    const SceneRender r = render_scene(rec.primitives, rec.pose, cfg, cfg.resolution, cfg.resolution);
    ds.images.push_back(image_to_tensor(r.image));
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Mesh scene_mesh(const std::vector<Primitive>& primitives, int sphere_subdivisions) {
  Mesh m;
  for (const auto& p : primitives) {
    if (p.kind == Primitive::Kind::sphere)
      m.append(make_sphere(p.center, p.size.x(), sphere_subdivisions));
    else
      m.append(make_box(p.center, p.size));
  }
  return m;
}

void save_synthetic(const SyntheticDataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream poses(fs::path(dir) / "poses.txt");
  std::ofstream scene(fs::path(dir) / "scene.txt");
  if (!poses || !scene) throw Error("cannot write dataset metadata in '" + dir + "'");
  poses.precision(17);
  scene.precision(17);
  scene << "# id kind cx cy cz sx sy sz r g b\n";
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.ppm", i);
    write_image(tensor_to_image(ds.images.at(i)), (fs::path(dir) / name).string(), ImageFormat::ppm);
    const auto& r = ds.records[i];
    poses << i << ' ' << r.pose.yaw() << ' ' << r.pose.pitch() << ' ' << r.pose.radius << '\n';
    for (const auto& p : r.primitives)
      scene << i << ' ' << (p.kind == Primitive::Kind::sphere ? "sphere" : "box") << ' '
            << p.center.x() << ' ' << p.center.y() << ' ' << p.center.z() << ' ' << p.size.x()
            << ' ' << p.size.y() << ' ' << p.size.z() << ' ' << p.color.x() << ' ' << p.color.y()
            << ' ' << p.color.z() << '\n';
  }
}

BatchStream::BatchStream(const ImageDataset& dataset, std::int64_t batch, std::uint64_t seed)
    : data_(&dataset), batch_(batch), rng_(seed) {
  if (batch < 1) throw Error("batch size must be positive");
  if (dataset.size() == 0) throw Error("cannot stream an empty dataset");
  order_.resize(dataset.size());
  reshuffle();
}

void BatchStream::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  for (std::size_t i = order_.size() - 1; i > 0; --i) std::swap(order_[i], order_[rng_.below(i + 1)]);
  cursor_ = 0;
}

Tensor BatchStream::next(DType dtype) {
  const int r = data_->resolution();
  const std::size_t plane = 3 * static_cast<std::size_t>(r) * r;
  std::vector<float> v(static_cast<std::size_t>(batch_) * plane);
  for (std::int64_t b = 0; b < batch_; ++b) {
    if (cursor_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    const float* src = data_->raw(order_[cursor_++]);
    std::copy_n(src, plane, v.begin() + static_cast<std::ptrdiff_t>(b * plane));
  }
  Tensor t = Tensor::adopt(std::move(v), {batch_, 3, r, r});
  return dtype == DType::f32 ? t : t.to(dtype);
}

std::string BatchStream::state() const {
  std::ostringstream os;
  os << epoch_ << ' ' << cursor_ << ' ' << order_.size();
  for (auto i : order_) os << ' ' << i;
  os << '\n' << rng_.state();
  return os.str();
}

void BatchStream::set_state(const std::string& state) {
  std::istringstream is(state);
  std::size_t n = 0;
  is >> epoch_ >> cursor_ >> n;
  if (!is || n != data_->size()) throw Error("batch stream state does not match the dataset");
  order_.resize(n);
  for (auto& i : order_) is >> i;
  is.ignore(1);
  std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  rng_.set_state(rest);
}

}  // namespace vgan
