// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vgan/adversary/discriminator.hpp"
#include "vgan/dataio/dataset.hpp"
#include "vgan/renderer/generator.hpp"
#include "vgan/trainer/adam.hpp"

namespace vgan {

struct StageSpec {
  int resolution = 32;
  double kimg = 500.0;
};

struct TrainConfig {
  std::string dataset = "synthetic";
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  std::int64_t batch = 64;
  AdamConfig g_adam;
  AdamConfig d_adam;
  double lambda = 0.2;
  std::vector<StageSpec> schedule{{32, 500.0}};
  double fade_fraction = 0.2;
  bool stratified = true;
  std::uint64_t seed = 0;
  std::uint64_t shuffle_seed = 0;  // order of real images

  std::int64_t latent_dim() const { return generator.mapping.latent_dim; }
  const CameraConfig& camera() const { return generator.camera; }
  double total_kimg() const;
  /// Throws vgan::Error naming the offending field.
  void validate() const;
};

/// Stable text form of every field that shapes the networks or the update rule.
std::string describe(const TrainConfig& cfg);
std::uint64_t config_hash(const TrainConfig& cfg);

struct LossReport {
  std::uint64_t step = 0;
  int resolution = 0;
  double alpha = 1.0;
  double d_loss = 0.0;  // adversarial part only
  double r1 = 0.0;      // unweighted penalty
  double g_loss = 0.0;
  double real_score = 0.0;  // mean D(real)
  double fake_score = 0.0;  // mean D(fake) during the D step
  double d_accuracy = 0.0;  // fraction of real > 0 and fake < 0
};

struct StepContext {
  int resolution = 32;
  double alpha = 1.0;
  std::uint64_t step = 0;
};

/// One discriminator update (adversarial loss + λ·R1) followed by one
/// generator update with freshly sampled codes and poses.
LossReport train_step(Generator& g, Discriminator& d, Adam& g_opt, Adam& d_opt,
                      const Tensor& real_batch, const TrainConfig& cfg, const StepContext& ctx,
                      Rng& rng);

/// Downsamples dataset images to `resolution`, blending with the half
/// resolution version while a stage fades in.
Tensor prepare_real(const Tensor& batch, int resolution, double alpha);

struct CheckpointState;

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const ImageDataset& data);

  struct Phase {
    std::size_t stage = 0;
    int resolution = 0;
    double alpha = 1.0;
  };
  Phase phase() const;
  bool done() const;

  /// Runs one step of the schedule. Returns the losses of that step.
  LossReport step();

  Generator& generator() { return *g_; }
  Discriminator& discriminator() { return *d_; }
  const Generator& generator() const { return *g_; }
  const Discriminator& discriminator() const { return *d_; }
  const TrainConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return step_; }
  std::uint64_t images_shown() const { return shown_; }
  std::size_t growth_events() const { return growth_events_; }
  Rng& rng() { return rng_; }

  CheckpointState checkpoint() const;
  void restore(const CheckpointState& state);

 private:
  TrainConfig cfg_;
  const ImageDataset* data_;
  Rng rng_;
  std::unique_ptr<Generator> g_;
  std::unique_ptr<Discriminator> d_;
  std::unique_ptr<Adam> g_opt_, d_opt_;
  BatchStream stream_;
  std::uint64_t step_ = 0;
  std::uint64_t shown_ = 0;
  std::size_t growth_events_ = 0;
  std::size_t last_stage_ = 0;
};

struct ScheduleHooks {
  std::string out_dir;              // empty disables files
  std::uint64_t checkpoint_every = 0;
  std::uint64_t sample_every = 0;
  int sample_count = 16;
  const CheckpointState* resume = nullptr;
  std::function<void(const Trainer&, const LossReport&)> on_step;
  std::function<void(const Trainer&, std::size_t stage)> on_growth;
};

/// Trains every stage for its kimg; returns the final checkpoint.
CheckpointState run_schedule(const TrainConfig& cfg, const ImageDataset& data,
                             const ScheduleHooks& hooks = {});

/// Generator weights from a checkpoint written for `cfg`.
std::unique_ptr<Generator> generator_from_checkpoint(const TrainConfig& cfg,
                                                     const CheckpointState& state);

/// Tiles [B, 3, H, W] into one image with `cols` columns.
Image make_grid(const Tensor& images, int cols);

}  // namespace vgan
