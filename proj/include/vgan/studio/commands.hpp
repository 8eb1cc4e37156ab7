// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vgan {

struct GlobalOptions {
  std::string config;      // config file path or "preset:<name>"
  std::string checkpoint;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

/// Worker threads: 1 when deterministic, else VGAN_THREADS if set, else the
/// hardware concurrency.
int worker_threads(const GlobalOptions& opts);

struct TrainOptions {
  std::string resume;
  bool quiet = false;
};
struct RenderOptions {
  std::vector<std::pair<double, double>> poses;  // (yaw, pitch) in radians
  int views = 5;                                 // used when poses is empty
  int samples = 1;
};
struct MeshOptions {
  int grid_res = 128;
  double threshold = 10.0;
};
struct MetricsOptions {
  std::vector<std::string> which{"reprojection"};
  int samples = 4;
  int fd_samples = 256;
  int grid_res = 64;
  double threshold = 10.0;
  std::string predictions;
};
struct MixOptions {
  int rows = 3;
  int cols = 3;
  double yaw = 0.0, pitch = 0.0;
};
struct PcaOptions {
  double yaw = 0.0, pitch = 0.0;
};

// Each returns a process exit code and reports problems on `err`.
int cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out, std::ostream& err);
int cmd_render(const GlobalOptions& g, const RenderOptions& o, std::ostream& out, std::ostream& err);
int cmd_mesh(const GlobalOptions& g, const MeshOptions& o, std::ostream& out, std::ostream& err);
int cmd_metrics(const GlobalOptions& g, const MetricsOptions& o, std::ostream& out, std::ostream& err);
int cmd_mix(const GlobalOptions& g, const MixOptions& o, std::ostream& out, std::ostream& err);
int cmd_pcaviz(const GlobalOptions& g, const PcaOptions& o, std::ostream& out, std::ostream& err);
int cmd_presets(const std::string& dir, std::ostream& out, std::ostream& err);

}  // namespace vgan
