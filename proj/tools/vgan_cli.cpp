// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>

#include "vgan/studio/commands.hpp"

namespace {

std::vector<std::pair<double, double>> parse_poses(const std::vector<std::string>& specs) {
  std::vector<std::pair<double, double>> poses;
  for (const auto& s : specs) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("--pose", "expected yaw,pitch");
    poses.emplace_back(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
  }
  return poses;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vgan: 3D-aware image synthesis from a learned feature volume"};
  app.require_subcommand(1);
  vgan::GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "config file, or preset:<name>");
  app.add_option("--checkpoint", g.checkpoint, "checkpoint file");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--deterministic", g.deterministic, "single-threaded, bit-reproducible");

  vgan::TrainOptions train;
  auto* c_train = app.add_subcommand("train", "train a generator");
  c_train->add_option("--resume", train.resume, "checkpoint to resume from");
  c_train->add_flag("--quiet", train.quiet);

  vgan::RenderOptions render;
  std::vector<std::string> pose_specs;
  auto* c_render = app.add_subcommand("render", "render images at given poses");
  c_render->add_option("--pose", pose_specs, "yaw,pitch in radians (repeatable)");
  c_render->add_option("--views", render.views, "pitch sweep size when no --pose is given");
  c_render->add_option("--samples", render.samples, "latent samples");

  vgan::MeshOptions mesh;
  auto* c_mesh = app.add_subcommand("mesh", "extract an isosurface mesh");
  c_mesh->add_option("--grid", mesh.grid_res, "lattice resolution")->check(CLI::Range(8, 1024));
  c_mesh->add_option("--threshold", mesh.threshold, "density iso-level");

  vgan::MetricsOptions metrics;
  auto* c_metrics = app.add_subcommand("metrics", "evaluate a checkpoint");
  c_metrics->add_option("--which", metrics.which, "reprojection, fd, pose")
      ->check(CLI::IsMember({"reprojection", "fd", "pose"}));
  c_metrics->add_option("--samples", metrics.samples, "latent samples for reprojection");
  c_metrics->add_option("--fd-samples", metrics.fd_samples, "images per side for fd");
  c_metrics->add_option("--predictions", metrics.predictions, "pose predictions file");
  c_metrics->add_option("--grid", metrics.grid_res, "mesh lattice for reprojection")->check(CLI::Range(8, 1024));
  c_metrics->add_option("--threshold", metrics.threshold, "density iso-level for reprojection");

  vgan::MixOptions mix;
  auto* c_mix = app.add_subcommand("mix", "structure/texture mixing grid");
  c_mix->add_option("--rows", mix.rows);
  c_mix->add_option("--cols", mix.cols);
  c_mix->add_option("--yaw", mix.yaw);
  c_mix->add_option("--pitch", mix.pitch);

  vgan::PcaOptions pca;
  auto* c_pca = app.add_subcommand("pcaviz", "PCA view of rendered descriptors");
  c_pca->add_option("--yaw", pca.yaw);
  c_pca->add_option("--pitch", pca.pitch);

  std::string preset_dir = "configs";
  auto* c_presets = app.add_subcommand("presets", "write the bundled preset configs");
  c_presets->add_option("dir", preset_dir);

  try {
    app.parse(argc, argv);
    render.poses = parse_poses(pose_specs);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (*seed_opt) g.seed = seed;

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*c_train) return vgan::cmd_train(g, train, out, err);
  if (*c_render) return vgan::cmd_render(g, render, out, err);
  if (*c_mesh) return vgan::cmd_mesh(g, mesh, out, err);
  if (*c_metrics) return vgan::cmd_metrics(g, metrics, out, err);
  if (*c_mix) return vgan::cmd_mix(g, mix, out, err);
  if (*c_pca) return vgan::cmd_pcaviz(g, pca, out, err);
  if (*c_presets) return vgan::cmd_presets(preset_dir, out, err);
  return 1;
}
