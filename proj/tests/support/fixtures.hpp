#pragma once

#include <numbers>

#include "vgan/dataio/dataset.hpp"
#include "vgan/evalkit/depth.hpp"
#include "vgan/evalkit/metrics.hpp"
#include "vgan/renderer/generator.hpp"
#include "vgan/trainer/trainer.hpp"

namespace vgan::testing {

// A generator small enough for finite differences: 4x4 rays, 4 depth samples.
inline GeneratorConfig tiny_generator_config(DType dtype = DType::f64) {
  GeneratorConfig g;
  g.dtype = dtype;
  g.mapping.latent_dim = 4;
  g.mapping.width = 8;
  g.mapping.depth = 2;
  g.mapping.film_gamma0 = 3.0;
  g.structural.template_channels = 3;
  g.structural.template_res = 2;
  g.structural.stage_channels = {3};
  g.field.descriptor_dim = 3;
  g.field.hidden = 6;
  g.field.layers = 2;
  g.field.feature_dim = 4;
  g.field.gamma0 = 3.0;
  g.renderer.feature_dim = 4;
  g.renderer.stage_channels = {3};
  g.renderer.torgb_kernel = 3;
  g.camera.fov_deg = 40.0;
  g.camera.near = 0.5;
  g.camera.far = 1.5;
  g.camera.n_steps = 4;
  g.camera.ray_res = 4;
  g.camera.dist = SampleDist::uniform;
  g.camera.h_lo = std::numbers::pi / 2 - 0.5;
  g.camera.h_hi = std::numbers::pi / 2 + 0.5;
  g.camera.v_lo = std::numbers::pi / 2 - 0.3;
  g.camera.v_hi = std::numbers::pi / 2 + 0.3;
  return g;
}

// Two-stage schedule (4 then 8 pixels) over a handful of synthetic images.
inline TrainConfig tiny_train_config(DType dtype = DType::f64) {
  TrainConfig t;
  t.generator = tiny_generator_config(dtype);
  t.discriminator.max_res = 8;
  t.discriminator.base_channels = 4;
  t.discriminator.max_channels = 8;
  t.batch = 4;
  t.lambda = 1.0;
  t.schedule = {{4, 0.024}, {8, 0.04}};
  t.seed = 3;
  t.shuffle_seed = 5;
  return t;
}

inline ImageDataset tiny_images(int count = 24, int resolution = 8) {
  SyntheticSceneConfig s;
  s.count = count;
  s.resolution = resolution;
  s.seed = 11;
  s.camera.fov_deg = 40.0;
  s.camera.near = 0.5;
  s.camera.far = 1.5;
  return generate_synthetic(s).images;
}

// Ground-truth views of a primitive scene: analytic shading plus mesh depth.
// `depth_noise` adds zero-mean Gaussian jitter to every hit.
inline std::vector<RenderedView> ground_truth_views(const std::vector<Primitive>& prims,
                                                   const SyntheticSceneConfig& scene,
                                                   const ReprojectionConfig& rc, int res,
                                                   double depth_noise = 0.0,
                                                   std::uint64_t noise_seed = 1) {
  const Mesh mesh = scene_mesh(prims, 5);
  Rng noise(noise_seed);
  std::vector<RenderedView> views;
  for (const CameraPose& pose : reprojection_poses(rc, scene.camera.radius)) {
    RenderedView v;
    v.image = image_to_tensor(render_scene(prims, pose, scene, res, res).image, DType::f64);
    v.depth = render_mesh_depth(mesh, pose, scene.camera, res, res);
    if (depth_noise > 0)
      for (double& d : v.depth.depth)
        if (d != kNoHit) d += depth_noise * noise.normal();
    views.push_back(std::move(v));
  }
  return views;
}

inline SyntheticSceneConfig reprojection_scene() {
  SyntheticSceneConfig s;
  s.camera.fov_deg = 50.0;
  s.camera.near = 0.4;
  s.camera.far = 1.6;
  return s;
}

}  // namespace vgan::testing
