// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vgan/camera/camera.hpp"
#include "vgan/diffcore/tensor.hpp"
#include "vgan/evalkit/depth.hpp"
#include "vgan/evalkit/marching_cubes.hpp"

namespace vgan {

struct MetricReport {
  std::string name;
  double value = 0.0;
  bool ok = true;  // false when the metric could not be computed
  std::vector<std::pair<std::string, double>> breakdown;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::string note;

  double get(const std::string& key) const;
};

void write_report_kv(const MetricReport& report, std::ostream& os);
std::string report_json(const MetricReport& report);
/// Writes `<stem>.txt` (key=value) and `<stem>.json`.
void save_report(const MetricReport& report, const std::string& stem);

// ------------------------------------------------------------ Fréchet distance

/// ‖μ₁−μ₂‖² + Tr(Σ₁ + Σ₂ − 2(Σ₁Σ₂)^{1/2}) between Gaussian fits of the rows.
double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Images [B, 3, H, W] in [−1, 1] → one feature row per image.
using FeatureExtractor = std::function<Eigen::MatrixXd(const Tensor& images)>;

/// Fixed, seeded random convolutional features with global pooling. Only
/// meaningful for relative comparisons; not comparable to Inception-based FID.
class RandomFeatureExtractor {
 public:
  explicit RandomFeatureExtractor(std::uint64_t seed = 20211, int width = 32);
  Eigen::MatrixXd operator()(const Tensor& images) const;
  int dim() const;

 private:
  Tensor w1_, w2_;
  int width_;
};

// ------------------------------------------------------------------ pose error

struct PoseAngles {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
};

/// Lines of "id yaw_deg pitch_deg"; blank lines and '#' comments skipped.
std::vector<std::pair<long, PoseAngles>> read_predictions(const std::string& path);

/// Per sample |Δyaw| + |Δpitch| in degrees, averaged over samples.
MetricReport pose_error(const std::vector<PoseAngles>& given,
                        const std::vector<PoseAngles>& predicted);

// ---------------------------------------------------------- reprojection error

struct ReprojectionConfig {
  int views = 5;
  double yaw = 0.0;
  double pitch_lo = -0.3;
  double pitch_hi = 0.3;
  double occlusion_tol = 0.05;
  int grid_res = 64;
  double threshold = kDefaultIsoThreshold;
};

/// Evenly spaced pitches over [pitch_lo, pitch_hi] at fixed yaw.
std::vector<CameraPose> reprojection_poses(const ReprojectionConfig& cfg, double radius);

struct RenderedView {
  Tensor image;  // [3, H, W] in [−1, 1]
  DepthMap depth;
};

struct PairWarp {
  double intensity = 0.0;   // mean |ΔI| over channels
  double coordinate = 0.0;  // mean round-trip |Δ| of normalized pixel coordinates
  std::int64_t pixels = 0;
};

/// Warps pixels of a into b through a's depth and back; both directions pooled.
PairWarp warp_pair(const RenderedView& a, const RenderedView& b, const CameraConfig& cam,
                   double occlusion_tol);

/// Mean over consecutive pairs. The headline value is the intensity error.
MetricReport reprojection_error(const std::vector<RenderedView>& views, const CameraConfig& cam,
                                const ReprojectionConfig& cfg);
MetricReport reprojection_error(const Generator& g, const CodeBundle& codes,
                                const ReprojectionConfig& cfg);

}  // namespace vgan
