// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "vgan/camera/camera.hpp"
#include "vgan/dataio/image.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tensor.hpp"
#include "vgan/evalkit/mesh.hpp"

namespace vgan {

enum class DataSource { folder, synthetic };

struct DatasetSpec {
  DataSource source = DataSource::synthetic;
  std::string path;
  int resolution = 32;
  bool center_crop = true;
  std::uint64_t shuffle_seed = 0;
};

/// Images [3, R, R] in [−1, 1], stored contiguously.
class ImageDataset {
 public:
  ImageDataset() = default;
  explicit ImageDataset(int resolution) : resolution_(resolution) {}

  void push_back(const Tensor& chw);
  std::size_t size() const { return count_; }
  int resolution() const { return resolution_; }
  Tensor at(std::size_t i, DType dtype = DType::f32) const;
  const float* raw(std::size_t i) const { return data_.data() + i * plane(); }

 private:
  std::size_t plane() const { return 3 * static_cast<std::size_t>(resolution_) * resolution_; }
  int resolution_ = 0;
  std::size_t count_ = 0;
  std::vector<float> data_;
};

/// Loads every decodable PNG/PPM under spec.path (sorted by name). Undecodable
/// files are reported to `warnings` and skipped.
ImageDataset load_folder(const DatasetSpec& spec, std::ostream* warnings = nullptr);

struct Primitive {
  enum class Kind { sphere, box };
  Kind kind = Kind::sphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Constant(0.3);  // radius in x, or half extents
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.8); // albedo in [0, 1]
};

struct SyntheticSceneConfig {
  int count = 2000;
  int resolution = 32;
  CameraConfig camera;
  std::uint64_t seed = 0;
  Eigen::Vector3d light_dir = Eigen::Vector3d(0.4, 0.8, 0.6).normalized();
  double ambient = 0.3;
  Eigen::Vector3d background = Eigen::Vector3d(0.12, 0.12, 0.16);
  double second_prob = 0.5;  // chance of an extra small sphere
};

struct SyntheticRecord {
  CameraPose pose;
  std::vector<Primitive> primitives;
};

struct SyntheticDataset {
  SyntheticSceneConfig config;
  ImageDataset images;
  std::vector<SyntheticRecord> records;
};

struct SceneRender {
  Image image;
  std::vector<double> depth;  // ray parameter of the nearest hit, or −1
};

/// Analytic ray casting with Lambertian shading under a fixed world light.
SceneRender render_scene(const std::vector<Primitive>& primitives, const CameraPose& pose,
                         const SyntheticSceneConfig& cfg, int height, int width);
std::vector<Primitive> sample_scene(const SyntheticSceneConfig& cfg, Rng& rng);
SyntheticDataset generate_synthetic(const SyntheticSceneConfig& cfg);
Mesh scene_mesh(const std::vector<Primitive>& primitives, int sphere_subdivisions = 4);

/// Directory of PPM images plus poses.txt (id yaw pitch radius) and scene.txt.
void save_synthetic(const SyntheticDataset& ds, const std::string& dir);

/// Shuffled, cyclic batches [b, 3, R, R]; one fresh permutation per epoch.
class BatchStream {
 public:
  BatchStream(const ImageDataset& dataset, std::int64_t batch, std::uint64_t seed);

  Tensor next(DType dtype = DType::f32);
  std::uint64_t epoch() const { return epoch_; }
  std::int64_t batch() const { return batch_; }

  std::string state() const;
  void set_state(const std::string& state);

 private:
  void reshuffle();

  const ImageDataset* data_;
  std::int64_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace vgan
