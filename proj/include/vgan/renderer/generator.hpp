// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "vgan/camera/camera.hpp"
#include "vgan/field/field.hpp"
#include "vgan/nnlayers/mapping.hpp"
#include "vgan/renderer/neural_renderer.hpp"
#include "vgan/structural/volume.hpp"

namespace vgan {

struct GeneratorConfig {
  MappingConfig mapping;
  StructuralConfig structural;
  FieldConfig field;
  RendererConfig renderer;
  CameraConfig camera;
  DType dtype = DType::f32;

  /// Throws vgan::Error on inconsistent widths between sub-networks.
  void validate() const;
};

/// Ray resolution and renderer depth used to emit images of a given size.
struct StageGeometry {
  int ray_res;
  int levels;
};

struct RenderRequest {
  std::vector<CameraPose> poses;  // one per batch row
  int ray_res = 0;                // 0 selects camera.ray_res
  int levels = -1;                // −1 selects every renderer stage
  double alpha = 1.0;
  bool stratified = false;
  Rng* rng = nullptr;             // required when stratified
};

struct GeneratorOutput {
  Tensor image;        // [B, 3, H, W]
  Tensor feature_map;  // [B, F, h, w]
  Tensor volume;       // [B, C, R, R, R]
  Tensor descriptors;  // [B, h·w·N, C]
  Tensor sigma;        // [B, h·w, N]
  Tensor weights;      // [B, h·w, N]
  std::vector<double> depths;  // B·h·w·N sample depths
};

class Generator {
 public:
  Generator(const GeneratorConfig& cfg, Rng& rng);

  GeneratorOutput forward(const CodeBundle& codes, const RenderRequest& request) const;
  /// σ at world points (x y z triples) for a single-sample code bundle.
  std::vector<double> density(const CodeBundle& codes, const std::vector<double>& points,
                              std::int64_t chunk = 32768) const;

  StageGeometry stage_geometry(int resolution) const;
  int output_res() const;
  const GeneratorConfig& config() const { return cfg_; }
  const MappingNetwork& mapping() const { return mapping_; }
  const FeatureVolumeNet& structural() const { return structural_; }
  const FieldNet& field() const { return field_; }
  const NeuralRenderer& renderer() const { return renderer_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  GeneratorConfig cfg_;
  FeatureVolumeNet structural_;
  FieldNet field_;
  NeuralRenderer renderer_;
  MappingNetwork mapping_;
  ParamSet params_;
};

/// Standard-normal latent rows [batch, latent_dim].
Tensor sample_latent(std::int64_t batch, std::int64_t latent_dim, Rng& rng, DType dtype);

}  // namespace vgan
