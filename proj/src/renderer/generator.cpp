// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/renderer/generator.hpp"

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/renderer/volume_render.hpp"

namespace vgan {

namespace {

ConditioningLayout layout_for(const FeatureVolumeNet& s, const FieldNet& f,
                              const NeuralRenderer& r) {
  ConditioningLayout l;
  l.adain_channels = s.config().stage_channels;
  l.film_widths = f.film_widths();
  l.modconv_channels = r.modconv_channels();
  return l;
}

}  // namespace

void GeneratorConfig::validate() const {
  camera.validate();
  if (field.descriptor_dim != structural.stage_channels.back())
    throw Error("field descriptor_dim must equal the volume's output channels");
  if (renderer.feature_dim != field.feature_dim)
    throw Error("renderer feature_dim must equal the field's feature_dim");
  if (field.gamma0 != mapping.film_gamma0)
    throw Error("field gamma0 and mapping film_gamma0 differ");
}

Generator::Generator(const GeneratorConfig& cfg, Rng& rng)
    : cfg_(cfg),
      structural_((cfg.validate(), cfg.structural), rng, cfg.dtype),
      field_(cfg.field, rng, cfg.dtype),
      renderer_(cfg.renderer, rng, cfg.dtype),
      mapping_(cfg.mapping, layout_for(structural_, field_, renderer_), rng, cfg.dtype) {
  params_.extend("mapping.", mapping_.params());
  params_.extend("structural.", structural_.params());
  params_.extend("field.", field_.params());
  params_.extend("renderer.", renderer_.params());
}

int Generator::output_res() const { return cfg_.camera.ray_res << renderer_.num_stages(); }

StageGeometry Generator::stage_geometry(int resolution) const {
  const int rays = std::min(resolution, cfg_.camera.ray_res);
  int levels = 0;
  while ((rays << levels) < resolution) ++levels;
  if ((rays << levels) != resolution || levels > renderer_.num_stages())
    throw Error("generator cannot emit resolution " + std::to_string(resolution));
  return {rays, levels};
}

GeneratorOutput Generator::forward(const CodeBundle& codes, const RenderRequest& req) const {
  const std::int64_t b = codes.batch();
  if (static_cast<std::int64_t>(req.poses.size()) != b)
    throw Error("generator: " + std::to_string(req.poses.size()) + " poses for batch " +
                std::to_string(b));
  const int res = req.ray_res > 0 ? req.ray_res : cfg_.camera.ray_res;
  const int levels = req.levels < 0 ? renderer_.num_stages() : req.levels;
  const int n = cfg_.camera.n_steps;
  const std::int64_t rays = static_cast<std::int64_t>(res) * res;
  const std::int64_t p = rays * n;

  Conditioning cond = mapping_(codes);
  GeneratorOutput out;
  out.volume = structural_.synthesize(cond.adain_gamma, cond.adain_beta);

  auto points = std::make_shared<std::vector<double>>(static_cast<std::size_t>(b * p * 3));
  std::vector<double> dirs(static_cast<std::size_t>(b * p * 3));
  std::vector<double> delta(static_cast<std::size_t>(b * p));
  out.depths.resize(static_cast<std::size_t>(b * p));
  for (std::int64_t i = 0; i < b; ++i) {
    const RayGrid grid = generate_rays(req.poses[static_cast<std::size_t>(i)], cfg_.camera, res, res);
    for (std::int64_t r = 0; r < rays; ++r) {
      const auto t = sample_depths(cfg_.camera, req.stratified, req.rng);
      const auto dt = sample_intervals(t, cfg_.camera.far);
      const Eigen::Vector3d& d = grid.directions[static_cast<std::size_t>(r)];
      for (int k = 0; k < n; ++k) {
        const std::size_t q = static_cast<std::size_t>((i * rays + r) * n + k);
        const Eigen::Vector3d x = grid.origin + t[static_cast<std::size_t>(k)] * d;
        for (int a = 0; a < 3; ++a) {
          (*points)[3 * q + a] = x[a];
          dirs[3 * q + a] = d[a];
        }
        delta[q] = dt[static_cast<std::size_t>(k)];
        out.depths[q] = t[static_cast<std::size_t>(k)];
      }
    }
  }
  const DType dt = cfg_.dtype;
  Tensor coords = Tensor::from(*points, {b, p, 3}, dt);
  Tensor dir_t = Tensor::from(dirs, {b, p, 3}, dt);
  Tensor delta_t = Tensor::from(delta, {b, rays, n}, dt);

  out.descriptors = batch_query(out.volume, points, p);
  FieldSamples fs = field_.eval(out.descriptors, coords, dir_t, cond.film_gamma, cond.film_beta);
  out.sigma = reshape(fs.sigma, {b, rays, n});
  FeatureMap fm = render_feature_map(out.sigma, delta_t,
                                     reshape(fs.feature, {b, rays, n, cfg_.field.feature_dim}),
                                     res, res);
  out.feature_map = fm.map;
  out.weights = fm.rays.weights;
  out.image = renderer_.render(out.feature_map, cond.mod_scale, levels, req.alpha);
  return out;
}

std::vector<double> Generator::density(const CodeBundle& codes, const std::vector<double>& points,
                                       std::int64_t chunk) const {
  if (codes.batch() != 1) throw Error("density probes take a single code bundle");
  if (points.size() % 3) throw ShapeError("density: point list is not a multiple of 3");
  NoGradScope no_grad;
  const Conditioning cond = mapping_(codes);
  const Tensor volume = structural_.synthesize(cond.adain_gamma, cond.adain_beta);
  const auto total = static_cast<std::int64_t>(points.size() / 3);
  std::vector<double> sigma;
  sigma.reserve(static_cast<std::size_t>(total));
  for (std::int64_t start = 0; start < total; start += chunk) {
    const std::int64_t m = std::min(chunk, total - start);
    auto pts = std::make_shared<const std::vector<double>>(points.begin() + 3 * start,
                                                           points.begin() + 3 * (start + m));
    Tensor desc = batch_query(volume, pts, m);
    Tensor coords = Tensor::from(*pts, {1, m, 3}, cfg_.dtype);
    for (double s : field_.density(desc, coords, cond.film_gamma, cond.film_beta).values())
      sigma.push_back(s);
  }
  return sigma;
}

Tensor sample_latent(std::int64_t batch, std::int64_t latent_dim, Rng& rng, DType dtype) {
  return randn({batch, latent_dim}, rng, 1.0, dtype);
}

}  // namespace vgan
