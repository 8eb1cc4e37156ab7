// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <unordered_map>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/trainer/checkpoint.hpp"

namespace vgan {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Seq>
std::string join(const Seq& s) {
  std::string out;
  for (auto v : s) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

CameraPose mean_pose(const CameraConfig& cam) {
  CameraPose p;
  p.theta_h = 0.5 * (cam.h_lo + cam.h_hi);
  p.theta_v = 0.5 * (cam.v_lo + cam.v_hi);
  p.radius = cam.radius;
  return p;
}

void copy_into(Tensor& dst, const Tensor& src, const std::string& name) {
  if (src.shape() != dst.shape() || src.dtype() != dst.dtype())
    throw CheckpointError(CheckpointErrc::format, "checkpoint tensor '" + name +
                                                      "' does not match the model layout");
  dispatch(dst.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto s = src.data<T>();
    std::copy(s.begin(), s.end(), dst.data<T>().begin());
  });
}

}  // namespace

double TrainConfig::total_kimg() const {
  double k = 0.0;
  for (const auto& s : schedule) k += s.kimg;
  return k;
}

void TrainConfig::validate() const {
  generator.validate();
  if (batch < 1) throw Error("train: batch must be at least 1");
  if (schedule.empty()) throw Error("train: schedule is empty");
  int prev = 0;
  for (const auto& s : schedule) {
    if (!is_pow2(s.resolution)) throw Error("train: schedule resolutions must be powers of two");
    if (s.resolution <= prev) throw Error("train: schedule resolutions must ascend");
    if (!(s.kimg > 0.0)) throw Error("train: every stage needs kimg > 0");
    prev = s.resolution;
  }
  if (prev > discriminator.max_res)
    throw Error("train: final resolution exceeds the discriminator's max_res");
  if (!(fade_fraction >= 0.0 && fade_fraction <= 1.0))
    throw Error("train: fade_fraction must lie in [0, 1]");
  if (!(lambda >= 0.0)) throw Error("train: lambda must be nonnegative");
  for (const AdamConfig* a : {&g_adam, &d_adam}) {
    if (!(a->lr >= 0.0)) throw Error("train: learning rates must be nonnegative");
    if (!(a->beta0 >= 0.0 && a->beta0 < 1.0 && a->beta1 >= 0.0 && a->beta1 < 1.0))
      throw Error("train: Adam betas must lie in [0, 1)");
    if (!(a->eps > 0.0)) throw Error("train: Adam eps must be positive");
  }
}

std::string describe(const TrainConfig& c) {
  const auto& g = c.generator;
  const auto& cam = g.camera;
  std::ostringstream os;
  os << "dtype=" << dtype_name(g.dtype) << '\n'
     << "mapping=" << g.mapping.latent_dim << ',' << g.mapping.width << ',' << g.mapping.depth
     << ',' << g17(g.mapping.film_gamma0) << '\n'
     << "structural=" << g.structural.template_channels << ',' << g.structural.template_res << ';'
     << join(g.structural.stage_channels) << '\n'
     << "field=" << g.field.descriptor_dim << ',' << g.field.hidden << ',' << g.field.layers << ','
     << g.field.feature_dim << ',' << g17(g.field.gamma0) << '\n'
     << "renderer=" << g.renderer.feature_dim << ';' << join(g.renderer.stage_channels) << ';'
     << g.renderer.torgb_kernel << ',' << g.renderer.demod << '\n'
     << "camera=" << g17(cam.fov_deg) << ',' << g17(cam.near) << ',' << g17(cam.far) << ','
     << cam.n_steps << ',' << g17(cam.h_lo) << ',' << g17(cam.h_hi) << ',' << g17(cam.v_lo) << ','
     << g17(cam.v_hi) << ',' << (cam.dist == SampleDist::gaussian ? "gaussian" : "uniform") << ','
     << cam.ray_res << ',' << g17(cam.radius) << '\n'
     << "discriminator=" << c.discriminator.max_res << ',' << c.discriminator.base_channels << ','
     << c.discriminator.max_channels << '\n'
     << "batch=" << c.batch << '\n';
  for (const auto& [name, a] : {std::pair{"g_adam", c.g_adam}, std::pair{"d_adam", c.d_adam}})
    os << name << '=' << g17(a.lr) << ',' << g17(a.beta0) << ',' << g17(a.beta1) << ','
       << g17(a.eps) << '\n';
  os << "lambda=" << g17(c.lambda) << '\n' << "schedule=";
  for (const auto& s : c.schedule) os << s.resolution << ':' << g17(s.kimg) << ';';
  os << '\n'
     << "fade=" << g17(c.fade_fraction) << '\n'
     << "stratified=" << c.stratified << '\n'
     << "seed=" << c.seed << '\n'
     << "shuffle_seed=" << c.shuffle_seed << '\n';
  return os.str();
}

std::uint64_t config_hash(const TrainConfig& cfg) {
  const std::uint64_t h = fnv1a(describe(cfg));
  return h == 0 ? 1 : h;
}

Tensor prepare_real(const Tensor& batch, int resolution, double alpha) {
  const auto src = batch.size(-1);
  if (batch.rank() != 4 || batch.size(1) != 3 || batch.size(2) != src)
    throw ShapeError("real batch must be [B, 3, R, R], got " + shape_str(batch.shape()));
  if (src < resolution || src % resolution != 0)
    throw ShapeError("dataset resolution " + std::to_string(src) + " cannot produce " +
                     std::to_string(resolution));
  NoGradScope ng;
  Tensor x = src == resolution ? batch : avg_pool(batch, static_cast<int>(src / resolution), 2);
  if (alpha < 1.0 && resolution >= 2) {
    Tensor low = upsample_nearest(avg_pool(x, 2, 2), 2, 2);
    x = add(mul(x, alpha), mul(low, 1.0 - alpha));
  }
  return x;
}

LossReport train_step(Generator& g, Discriminator& d, Adam& g_opt, Adam& d_opt,
                      const Tensor& real_batch, const TrainConfig& cfg, const StepContext& ctx,
                      Rng& rng) {
  const StageGeometry geo = g.stage_geometry(ctx.resolution);
  const std::int64_t b = real_batch.size(0);
  const DType dtype = cfg.generator.dtype;
  if (real_batch.shape() != Shape{b, 3, ctx.resolution, ctx.resolution})
    throw ShapeError("train_step: real batch " + shape_str(real_batch.shape()) +
                     " does not match resolution " + std::to_string(ctx.resolution));
  const Tensor real = real_batch.dtype() == dtype ? real_batch.detach() : real_batch.to(dtype);

  auto render = [&]() {
    Tensor z = sample_latent(b, cfg.latent_dim(), rng, dtype);
    RenderRequest req;
    for (std::int64_t i = 0; i < b; ++i) req.poses.push_back(sample_pose(cfg.camera(), rng));
    req.ray_res = geo.ray_res;
    req.levels = geo.levels;
    req.alpha = ctx.alpha;
    req.stratified = cfg.stratified;
    req.rng = &rng;
    return g.forward(CodeBundle::tied(z), req).image;
  };
  auto d_fn = [&](const Tensor& x) { return d(x, ctx.alpha); };

  LossReport rep;
  rep.step = ctx.step;
  rep.resolution = ctx.resolution;
  rep.alpha = ctx.alpha;

  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "non-finite " << what << " at step " << ctx.step << " (resolution " << ctx.resolution
       << ", alpha " << ctx.alpha << "): d_loss=" << rep.d_loss << " r1=" << rep.r1
       << " g_loss=" << rep.g_loss << " real_score=" << rep.real_score
       << " fake_score=" << rep.fake_score;
    throw NumericError(os.str());
  };

  {
    Tensor fake;
    {
      NoGradScope ng;
      fake = render();
    }
    Tape tape;
    TapeScope scope(tape);
    Tensor s_real, r1;
    if (cfg.lambda > 0.0) {
      r1 = r1_penalty(d_fn, real, tape, &s_real);
    } else {
      s_real = d_fn(real);
    }
    Tensor s_fake = d_fn(fake);
    Tensor adv = discriminator_loss(s_real, s_fake);
    Tensor total = r1.defined() ? add(adv, mul(r1, cfg.lambda)) : adv;

    rep.d_loss = adv.item();
    rep.r1 = r1.defined() ? r1.item() : 0.0;
    double acc = 0.0;
    for (std::int64_t i = 0; i < b; ++i) {
      rep.real_score += s_real.flat(i) / static_cast<double>(b);
      rep.fake_score += s_fake.flat(i) / static_cast<double>(b);
      acc += (s_real.flat(i) > 0.0) + (s_fake.flat(i) < 0.0);
    }
    rep.d_accuracy = acc / static_cast<double>(2 * b);
    if (!std::isfinite(rep.d_loss) || !std::isfinite(rep.r1)) fail("discriminator loss");

    backward(tape, total);
    d_opt.step();
    d.params().zero_grad();
  }

  {
    for (auto& [name, p] : d.params()) p.requires_grad_(false);
    struct Restore {
      ParamSet& ps;
      ~Restore() {
        for (auto& [name, p] : ps) p.requires_grad_(true);
      }
    } restore{d.params()};

    Tape tape;
    TapeScope scope(tape);
    Tensor loss = generator_loss(d_fn(render()));
    rep.g_loss = loss.item();
    if (!std::isfinite(rep.g_loss)) fail("generator loss");
    backward(tape, loss);
    g_opt.step();
    g.params().zero_grad();
  }
  return rep;
}

Trainer::Trainer(const TrainConfig& cfg, const ImageDataset& data)
    : cfg_(cfg), data_(&data), rng_(cfg.seed * 4 + 2), stream_(data, cfg.batch, cfg.shuffle_seed) {
  cfg_.validate();
  if (data.resolution() < cfg_.schedule.back().resolution)
    throw Error("train: dataset resolution " + std::to_string(data.resolution()) +
                " is below the final stage resolution");
  Rng init(cfg.seed * 4);
  g_ = std::make_unique<Generator>(cfg_.generator, init);
  d_ = std::make_unique<Discriminator>(cfg_.discriminator, init, cfg_.generator.dtype);
  for (const auto& s : cfg_.schedule) g_->stage_geometry(s.resolution);
  g_opt_ = std::make_unique<Adam>(g_->params(), cfg_.g_adam);
  d_opt_ = std::make_unique<Adam>(d_->params(), cfg_.d_adam);
}

Trainer::Phase Trainer::phase() const {
  double start = 0.0;
  const double shown = static_cast<double>(shown_);
  for (std::size_t i = 0; i < cfg_.schedule.size(); ++i) {
    const double len = cfg_.schedule[i].kimg * 1000.0;
    if (shown < start + len || i + 1 == cfg_.schedule.size()) {
      Phase p{i, cfg_.schedule[i].resolution, 1.0};
      const double fade = cfg_.fade_fraction * len;
      if (i > 0 && fade > 0.0) p.alpha = std::min(1.0, (shown - start) / fade);
      return p;
    }
    start += len;
  }
  return {};
}

bool Trainer::done() const {
  return static_cast<double>(shown_) >= cfg_.total_kimg() * 1000.0;
}

LossReport Trainer::step() {
  if (done()) throw Error("training schedule already finished");
  const Phase ph = phase();
  if (ph.stage != last_stage_) {
    growth_events_ += ph.stage - last_stage_;
    last_stage_ = ph.stage;
  }
  const Tensor real = prepare_real(stream_.next(cfg_.generator.dtype), ph.resolution, ph.alpha);
  LossReport rep = train_step(*g_, *d_, *g_opt_, *d_opt_, real, cfg_,
                              StepContext{ph.resolution, ph.alpha, step_}, rng_);
  ++step_;
  shown_ += static_cast<std::uint64_t>(cfg_.batch);
  return rep;
}

CheckpointState Trainer::checkpoint() const {
  CheckpointState s;
  s.config_hash = config_hash(cfg_);
  auto dump = [&](const char* tag, const ParamSet& ps, Adam& opt) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string& name = ps.name(i);
      s.params.push_back({std::string(tag) + "." + name, ps.at(i).clone()});
      s.optimizer.push_back({std::string(tag) + ".m." + name,
                             Tensor::adopt(opt.first_moment()[i], ps.at(i).shape())});
      s.optimizer.push_back({std::string(tag) + ".v." + name,
                             Tensor::adopt(opt.second_moment()[i], ps.at(i).shape())});
    }
  };
  dump("G", g_->params(), *g_opt_);
  dump("D", d_->params(), *d_opt_);
  s.g_opt_steps = g_opt_->steps();
  s.d_opt_steps = d_opt_->steps();
  s.step = step_;
  s.images_shown = shown_;
  s.growth_events = growth_events_;
  s.rng_states = {{"trainer", rng_.state()}, {"stream", stream_.state()}};
  return s;
}

void Trainer::restore(const CheckpointState& s) {
  if (s.config_hash != config_hash(cfg_))
    throw CheckpointError(CheckpointErrc::hash,
                          "checkpoint was written for a different configuration");
  std::unordered_map<std::string, const Tensor*> table;
  for (const auto& t : s.params) table[t.name] = &t.value;
  for (const auto& t : s.optimizer) table[t.name] = &t.value;
  auto lookup = [&](const std::string& name) -> const Tensor& {
    auto it = table.find(name);
    if (it == table.end())
      throw CheckpointError(CheckpointErrc::format, "checkpoint lacks tensor '" + name + "'");
    return *it->second;
  };
  auto load = [&](const char* tag, ParamSet& ps, Adam& opt) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string& name = ps.name(i);
      copy_into(ps.at(i), lookup(std::string(tag) + "." + name), name);
      for (auto [kind, buf] : {std::pair{".m.", &opt.first_moment()[i]},
                               std::pair{".v.", &opt.second_moment()[i]}}) {
        const Tensor& m = lookup(std::string(tag) + kind + name);
        if (m.dtype() != DType::f64 || m.numel() != static_cast<std::int64_t>(buf->size()))
          throw CheckpointError(CheckpointErrc::format, "optimizer state mismatch for " + name);
        auto d = m.data<double>();
        std::copy(d.begin(), d.end(), buf->begin());
      }
    }
  };
  load("G", g_->params(), *g_opt_);
  load("D", d_->params(), *d_opt_);
  g_opt_->set_steps(s.g_opt_steps);
  d_opt_->set_steps(s.d_opt_steps);
  for (const auto& [k, v] : s.rng_states) {
    if (k == "trainer")
      rng_.set_state(v);
    else if (k == "stream")
      stream_.set_state(v);
  }
  step_ = s.step;
  shown_ = s.images_shown;
  if (s.growth_events >= cfg_.schedule.size())
    throw CheckpointError(CheckpointErrc::format, "growth counter exceeds the schedule");
  growth_events_ = static_cast<std::size_t>(s.growth_events);
  // Growth is counted when the first step of a stage runs, so a checkpoint taken
  // exactly at a boundary still sits in the previous stage.
  last_stage_ = growth_events_;
}

std::unique_ptr<Generator> generator_from_checkpoint(const TrainConfig& cfg,
                                                     const CheckpointState& state) {
  if (state.config_hash != config_hash(cfg))
    throw CheckpointError(CheckpointErrc::hash,
                          "checkpoint was written for a different configuration");
  Rng init(cfg.seed * 4);
  auto g = std::make_unique<Generator>(cfg.generator, init);
  for (auto& [name, p] : g->params()) {
    const Tensor* src = state.param("G." + name);
    if (!src) throw CheckpointError(CheckpointErrc::format, "checkpoint lacks tensor 'G." + name + "'");
    copy_into(p, *src, name);
  }
  return g;
}

Image make_grid(const Tensor& images, int cols) {
  if (images.rank() != 4 || images.size(1) != 3)
    throw ShapeError("make_grid expects [B, 3, H, W], got " + shape_str(images.shape()));
  const auto b = images.size(0), h = images.size(2), w = images.size(3);
  cols = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(cols, b)));
  const auto rows = (b + cols - 1) / cols;
  Image grid;
  grid.width = static_cast<int>(w * cols);
  grid.height = static_cast<int>(h * rows);
  grid.rgb.assign(static_cast<std::size_t>(grid.width) * grid.height * 3, 0);
  for (std::int64_t i = 0; i < b; ++i) {
    const Image tile = tensor_to_image(slice(images, 0, i, 1).alias({3, h, w}));
    const auto ox = (i % cols) * w, oy = (i / cols) * h;
    for (std::int64_t y = 0; y < h; ++y)
      std::copy_n(tile.rgb.begin() + y * w * 3, w * 3,
                  grid.rgb.begin() + ((oy + y) * grid.width + ox) * 3);
  }
  return grid;
}

CheckpointState run_schedule(const TrainConfig& cfg, const ImageDataset& data,
                             const ScheduleHooks& hooks) {
  namespace fs = std::filesystem;
  Trainer t(cfg, data);
  if (hooks.resume) t.restore(*hooks.resume);
  if (!hooks.out_dir.empty()) fs::create_directories(hooks.out_dir);
  const std::uint64_t hash = config_hash(t.config());

  Rng sample_rng(cfg.seed * 4 + 3);
  const Tensor sample_z = sample_latent(hooks.sample_count, cfg.latent_dim(), sample_rng,
                                        cfg.generator.dtype);
  auto write_samples = [&](const std::string& path) {
    NoGradScope ng;
    const auto ph = t.phase();
    const auto geo = t.generator().stage_geometry(ph.resolution);
    RenderRequest req;
    req.poses.assign(static_cast<std::size_t>(hooks.sample_count), mean_pose(cfg.camera()));
    req.ray_res = geo.ray_res;
    req.levels = geo.levels;
    req.alpha = ph.alpha;
    const Tensor img = t.generator().forward(CodeBundle::tied(sample_z), req).image;
    const int cols = static_cast<int>(std::ceil(std::sqrt(hooks.sample_count)));
    write_image(make_grid(img, cols), path, format_for_path(path));
  };
  auto path_for = [&](const char* stem, std::uint64_t step, const char* ext) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%06llu.%s", stem, static_cast<unsigned long long>(step),
                  ext);
    return (fs::path(hooks.out_dir) / name).string();
  };

  std::size_t growth = t.growth_events();
  while (!t.done()) {
    const LossReport rep = t.step();
    if (t.growth_events() != growth) {
      growth = t.growth_events();
      if (hooks.on_growth) hooks.on_growth(t, t.phase().stage);
    }
    if (hooks.on_step) hooks.on_step(t, rep);
    if (hooks.out_dir.empty()) continue;
    if (hooks.checkpoint_every && t.steps() % hooks.checkpoint_every == 0) {
      CheckpointState s = t.checkpoint();
      s.config_hash = hash;
      save_checkpoint(s, path_for("checkpoint", t.steps(), "vgan"));
    }
    if (hooks.sample_every && t.steps() % hooks.sample_every == 0 && hooks.sample_count > 0)
      write_samples(path_for("samples", t.steps(), "png"));
  }
  CheckpointState final_state = t.checkpoint();
  if (!hooks.out_dir.empty()) {
    save_checkpoint(final_state, (fs::path(hooks.out_dir) / "final.vgan").string());
    if (hooks.sample_count > 0) write_samples((fs::path(hooks.out_dir) / "samples_final.png").string());
  }
  return final_state;
}

}  // namespace vgan
