// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include <map>

#include "vgan/studio/config.hpp"

namespace vgan {

namespace {

// Shared full-size architecture; the per-dataset rows differ in camera,
// penalty weight and output resolution.
constexpr const char* kFullArch = R"(
[mapping]
latent_dim = 256
width = 256
depth = 3

[structural]
template_channels = 256
template_res = 4
stage_channels = 128, 64, 32

[field]
hidden = 256
layers = 4
feature_dim = 256
gamma0 = 15

[train]
batch = 64
g_lr = 2.5e-4
d_lr = 2.5e-4
betas = 0, 0.999
adam_eps = 1e-8
fade_fraction = 0.2
stratified = true
seed = 0
dtype = f32
)";

std::string full_preset(const char* name, int res, const char* camera, double lambda) {
  const bool big = res == 256;
  std::string s = std::string("# ") + name + " at " + std::to_string(res) + "x" +
                  std::to_string(res) + "\n[dataset]\nsource = folder\npath = data/" + name +
                  "\nresolution = " + std::to_string(res) + "\ncrop = center\n\n[camera]\n" +
                  camera + "ray_res = 64\nradius = 1\n";
  s += kFullArch;
  s += "lambda = " + std::to_string(lambda) + "\n";
  s += big ? "schedule = 64:5000, 128:10000, 256:10000\n" : "schedule = 64:10000, 128:15000\n";
  s += std::string("\n[renderer]\nstage_channels = ") + (big ? "128, 64" : "128") +
       "\ntorgb_kernel = 3\ndemod = true\n\n[discriminator]\nmax_res = " + std::to_string(res) +
       "\nbase_channels = 64\nmax_channels = 512\n\n[output]\ndir = runs/" + name + "\n";
  return s;
}

const std::map<std::string, std::string>& table() {
  static const std::map<std::string, std::string> t = {
      {"celeba", full_preset("celeba", 128,
                             "fov = 12\nrange_depth = 0.88, 1.12\nsteps = 12\n"
                             "range_h = pi/2 +- 0.3\nrange_v = pi/2 +- 0.15\nsample_dist = gaussian\n",
                             0.2)},
      {"cat", full_preset("cat", 128,
                          "fov = 12\nrange_depth = 0.8, 1.2\nsteps = 12\n"
                          "range_h = pi/2 +- 0.5\nrange_v = pi/2 +- 0.4\nsample_dist = gaussian\n",
                          0.2)},
      {"carla", full_preset("carla", 128,
                            "fov = 30\nrange_depth = 0.7, 1.3\nsteps = 36\n"
                            "range_h = 0, 2*pi\nrange_v = pi/2 +- pi/8\nsample_dist = uniform\n",
                            1.0)},
      {"ffhq", full_preset("ffhq", 256,
                           "fov = 12\nrange_depth = 0.8, 1.2\nsteps = 14\n"
                           "range_h = pi/2 +- 0.4\nrange_v = pi/2 +- 0.2\nsample_dist = gaussian\n",
                           1.0)},
      {"compcars", full_preset("compcars", 256,
                               "fov = 20\nrange_depth = 0.8, 1.2\nsteps = 30\n"
                               "range_h = 0, 2*pi\nrange_v = pi/2 +- pi/8\nsample_dist = uniform\n",
                               1.0)},
      {"bedroom", full_preset("bedroom", 256,
                              "fov = 26\nrange_depth = 0.7, 1.3\nsteps = 40\n"
                              "range_h = pi/2 +- pi/8\nrange_v = pi/2 +- pi/10\nsample_dist = uniform\n",
                              1.0)},
      {"desk", R"(# Desk-scale synthetic primitives run (single CPU core, 32x32)
[dataset]
source = synthetic
resolution = 32
count = 2000
synthetic_seed = 7
shuffle_seed = 1

[camera]
fov = 50
range_depth = 0.4, 1.6
steps = 12
range_h = pi/2 +- 0.6
range_v = pi/2 +- 0.35
sample_dist = uniform
ray_res = 16
radius = 1

[mapping]
latent_dim = 64
width = 64
depth = 2

[structural]
template_channels = 32
template_res = 4
stage_channels = 24, 16

[field]
hidden = 64
layers = 3
feature_dim = 32
gamma0 = 15

[renderer]
stage_channels = 32
torgb_kernel = 3
demod = true

[discriminator]
max_res = 32
base_channels = 16
max_channels = 64

[train]
batch = 16
g_lr = 2.5e-4
d_lr = 2.5e-4
betas = 0, 0.999
adam_eps = 1e-8
lambda = 1
schedule = 32:48
fade_fraction = 0.2
stratified = true
seed = 0
dtype = f32

[output]
dir = runs/desk
checkpoint_every = 1000
sample_every = 250
)"},
  };
  return t;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"celeba", "cat", "carla", "ffhq", "compcars", "bedroom", "desk"};
}

std::string preset_text(const std::string& name) {
  auto it = table().find(name);
  if (it == table().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

RunConfig preset(const std::string& name) { return parse_run_config(preset_text(name), "preset:" + name); }

}  // namespace vgan
