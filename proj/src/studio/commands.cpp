// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/studio/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <numbers>
#include <thread>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/evalkit/metrics.hpp"
#include "vgan/studio/config.hpp"
#include "vgan/studio/visualize.hpp"
#include "vgan/trainer/checkpoint.hpp"

namespace vgan {

namespace fs = std::filesystem;

int worker_threads(const GlobalOptions& opts) {
  if (opts.deterministic) return 1;
  if (const char* env = std::getenv("VGAN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

RunConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = g.config.rfind("preset:", 0) == 0 ? preset(g.config.substr(7)) : load_run_config(g.config);
  if (g.seed) cfg.train.seed = *g.seed;
  return cfg;
}

struct Model {
  RunConfig cfg;
  std::unique_ptr<Generator> g;
};

Model load_model(const GlobalOptions& opts) {
  Model m;
  m.cfg = load_config(opts);
  if (opts.checkpoint.empty()) throw Error("--checkpoint is required");
  const CheckpointState state = load_checkpoint(opts.checkpoint, config_hash(m.cfg.train));
  m.g = generator_from_checkpoint(m.cfg.train, state);
  return m;
}

std::uint64_t latent_seed(const GlobalOptions& g) { return g.seed.value_or(0); }

std::vector<Tensor> latents(const Model& m, const GlobalOptions& g, int count) {
  Rng rng(latent_seed(g) * 2 + 1);
  std::vector<Tensor> z;
  for (int i = 0; i < count; ++i)
    z.push_back(sample_latent(1, m.cfg.train.latent_dim(), rng, m.cfg.train.generator.dtype));
  return z;
}

std::string indexed(const std::string& dir, const char* stem, int i, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%03d.%s", stem, i, ext);
  return (fs::path(dir) / name).string();
}

ImageDataset build_dataset(const RunConfig& cfg, std::ostream& err) {
  if (cfg.dataset.source == DataSource::folder) return load_folder(cfg.dataset, &err);
  return generate_synthetic(cfg.synthetic()).images;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(g);
    const std::string dir = g.out.empty() ? cfg.out_dir : g.out;
    fs::create_directories(dir);
    {
      std::ofstream c((fs::path(dir) / "config.cfg").string());
      c << serialize_run_config(cfg);
    }
    const ImageDataset data = build_dataset(cfg, err);
    std::optional<CheckpointState> resume;
    if (!o.resume.empty()) resume = load_checkpoint(o.resume, config_hash(cfg.train));
    const std::string log_path = (fs::path(dir) / "losses.csv").string();
    std::vector<std::string> kept;
    if (resume) {
      std::ifstream old(log_path);
      for (std::string line; std::getline(old, line);)
        if (kept.empty() || std::stoll(line) < static_cast<long long>(resume->step)) kept.push_back(line);
    }
    std::ofstream log(log_path);
    if (kept.empty()) kept.push_back("step,resolution,alpha,d_loss,r1,g_loss,real_score,fake_score,d_accuracy");
    for (const auto& line : kept) log << line << '\n';
    log.precision(9);
    ScheduleHooks hooks;
    hooks.out_dir = dir;
    hooks.checkpoint_every = cfg.checkpoint_every;
    hooks.sample_every = cfg.sample_every;
    hooks.resume = resume ? &*resume : nullptr;
    hooks.on_step = [&](const Trainer& t, const LossReport& r) {
      log << r.step << ',' << r.resolution << ',' << r.alpha << ',' << r.d_loss << ',' << r.r1 << ','
          << r.g_loss << ',' << r.real_score << ',' << r.fake_score << ',' << r.d_accuracy << '\n';
      if (!o.quiet && t.steps() % 100 == 0)
        out << "step " << t.steps() << " kimg " << t.images_shown() / 1000.0 << " res "
            << r.resolution << " d " << r.d_loss << " g " << r.g_loss << " r1 " << r.r1 << std::endl;
    };
    hooks.on_growth = [&](const Trainer&, std::size_t stage) {
      if (!o.quiet) out << "growing to stage " << stage << std::endl;
    };
    run_schedule(cfg.train, data, hooks);
    out << "wrote " << (fs::path(dir) / "final.vgan").string() << '\n';
    return 0;
  });
}

int cmd_render(const GlobalOptions& g, const RenderOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = load_model(g);
    const CameraConfig& cam = m.cfg.train.camera();
    std::vector<CameraPose> poses;
    for (const auto& [yaw, pitch] : o.poses) poses.push_back(CameraPose::from_yaw_pitch(yaw, pitch, cam.radius));
    if (poses.empty()) {
      if (o.views < 1) throw Error("--views must be positive");
      const double lo = cam.v_lo - std::numbers::pi / 2, hi = cam.v_hi - std::numbers::pi / 2;
      for (int i = 0; i < o.views; ++i) {
        const double p = o.views == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (o.views - 1);
        poses.push_back(CameraPose::from_yaw_pitch(0.0, p, cam.radius));
      }
    }
    fs::create_directories(g.out);
    const auto z = latents(m, g, o.samples);
    const int n = static_cast<int>(poses.size());
    parallel_for(n * o.samples, worker_threads(g), [&](int k) {
      NoGradScope ng;
      const int s = k / n, i = k % n;
      RenderRequest req;
      req.poses = {poses[static_cast<std::size_t>(i)]};
      const Tensor img = m.g->forward(CodeBundle::tied(z[static_cast<std::size_t>(s)]), req).image;
      const std::string path = indexed(g.out, "render", k, "png");
      write_image(tensor_to_image(img.alias({3, img.size(2), img.size(3)})), path, ImageFormat::png);
    });
    std::ofstream pf((fs::path(g.out) / "poses.txt").string());
    pf.precision(17);
    pf << "# id yaw_deg pitch_deg (render_<id>.png)\n";
    constexpr double deg = 180.0 / std::numbers::pi;
    for (int k = 0; k < n * o.samples; ++k) {
      const CameraPose& p = poses[static_cast<std::size_t>(k % n)];
      pf << k << ' ' << p.yaw() * deg << ' ' << p.pitch() * deg << '\n';
    }
    out << "wrote " << n * o.samples << " images to " << g.out << '\n';
    return 0;
  });
}

int cmd_mesh(const GlobalOptions& g, const MeshOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = load_model(g);
    const auto z = latents(m, g, 1);
    const Mesh mesh = extract_mesh(*m.g, CodeBundle::tied(z[0]), o.grid_res, o.threshold);
    fs::create_directories(g.out);
    const std::string path = (fs::path(g.out) / "mesh.obj").string();
    write_obj(mesh, path);
    if (mesh.empty()) err << "warning: density never crosses " << o.threshold << "; mesh is empty\n";
    out << "wrote " << path << " (" << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
        << " triangles)\n";
    return 0;
  });
}

int cmd_metrics(const GlobalOptions& g, const MetricsOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = load_model(g);
    fs::create_directories(g.out);
    int status = 0;
    for (const std::string& which : o.which) {
      MetricReport rep;
      if (which == "reprojection") {
        const auto z = latents(m, g, o.samples);
        ReprojectionConfig rc;
        rc.grid_res = o.grid_res;
        rc.threshold = o.threshold;
        std::vector<MetricReport> parts;
        for (const auto& zi : z) parts.push_back(reprojection_error(*m.g, CodeBundle::tied(zi), rc));
        rep = parts[0];
        rep.value = 0.0;
        for (auto& [k, v] : rep.breakdown) v = 0.0;
        int ok = 0;
        for (const auto& p : parts) {
          if (!p.ok) {
            rep.note = p.note;
            continue;
          }
          ++ok;
          rep.value += p.value;
          for (std::size_t i = 0; i < rep.breakdown.size() && i < p.breakdown.size(); ++i)
            rep.breakdown[i].second += p.breakdown[i].second;
        }
        rep.ok = ok > 0;
        if (ok > 0) {
          rep.value /= ok;
          for (auto& [k, v] : rep.breakdown) v /= ok;
        }
        rep.provenance.emplace_back("samples", std::to_string(ok) + "/" + std::to_string(parts.size()));
      } else if (which == "fd") {
        const ImageDataset data = build_dataset(m.cfg, err);
        const int n = std::min<int>(o.fd_samples, static_cast<int>(data.size()));
        const int res = m.g->output_res();
        std::vector<Tensor> reals;
        for (int i = 0; i < n; ++i) {
          Tensor x = data.at(static_cast<std::size_t>(i)).alias({1, 3, data.resolution(), data.resolution()});
          reals.push_back(prepare_real(x, res, 1.0));
        }
        Rng rng(latent_seed(g) * 2 + 1);
        NoGradScope ng;
        std::vector<Tensor> fakes;
        for (int i = 0; i < n; i += 16) {
          const int b = std::min(16, n - i);
          RenderRequest req;
          for (int k = 0; k < b; ++k) req.poses.push_back(sample_pose(m.cfg.train.camera(), rng));
          const Tensor zb = sample_latent(b, m.cfg.train.latent_dim(), rng, m.cfg.train.generator.dtype);
          fakes.push_back(m.g->forward(CodeBundle::tied(zb), req).image);
        }
        RandomFeatureExtractor fx;
        rep.name = "frechet_distance";
        rep.value = frechet_distance(fx(concat(reals, 0)), fx(concat(fakes, 0)));
        rep.provenance.emplace_back("extractor", "bundled random-conv features; not comparable to FID");
        rep.provenance.emplace_back("samples", std::to_string(n));
      } else if (which == "pose") {
        if (o.predictions.empty()) throw Error("pose metrics need --predictions");
        const auto pred = read_predictions(o.predictions);
        const auto given_path = (fs::path(g.out) / "poses.txt").string();
        if (!fs::exists(given_path)) throw Error("pose metrics need " + given_path + " (written by 'render')");
        std::map<long, PoseAngles> by_id(pred.begin(), pred.end());
        std::vector<PoseAngles> given, predicted;
        for (const auto& [id, p] : read_predictions(given_path)) {
          auto it = by_id.find(id);
          if (it == by_id.end()) throw Error("no prediction for sample " + std::to_string(id));
          given.push_back(p);
          predicted.push_back(it->second);
        }
        rep = pose_error(given, predicted);
      } else {
        throw Error("unknown metric '" + which + "' (reprojection, fd, pose)");
      }
      rep.provenance.emplace_back("checkpoint", g.checkpoint);
      save_report(rep, (fs::path(g.out) / rep.name).string());
      write_report_kv(rep, out);
      if (!rep.ok) {
        err << "warning: " << rep.name << " failed: " << rep.note << '\n';
        status = 3;
      }
    }
    return status;
  });
}

int cmd_mix(const GlobalOptions& g, const MixOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = load_model(g);
    if (o.rows < 1 || o.cols < 1) throw Error("--rows and --cols must be positive");
    const auto z = latents(m, g, o.rows + o.cols);
    const std::vector<Tensor> rows(z.begin(), z.begin() + o.rows), cols(z.begin() + o.rows, z.end());
    const MixGrid grid = style_mix(*m.g, rows, cols, CameraPose::from_yaw_pitch(o.yaw, o.pitch, m.cfg.train.camera().radius));
    fs::create_directories(g.out);
    const std::string path = (fs::path(g.out) / "mix.png").string();
    write_image(grid.image, path, ImageFormat::png);
    out << "wrote " << path << '\n';
    return 0;
  });
}

int cmd_pcaviz(const GlobalOptions& g, const PcaOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model m = load_model(g);
    const auto z = latents(m, g, 1);
    const DescriptorPca res = descriptor_pca(*m.g, CodeBundle::tied(z[0]),
                                             CameraPose::from_yaw_pitch(o.yaw, o.pitch, m.cfg.train.camera().radius));
    fs::create_directories(g.out);
    const std::string path = (fs::path(g.out) / "pca.png").string();
    write_image(res.image, path, ImageFormat::png);
    out << "wrote " << path << " (" << res.pca.components.rows() << " components)\n";
    return 0;
  });
}

int cmd_presets(const std::string& dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    fs::create_directories(dir);
    for (const auto& name : preset_names()) {
      const std::string path = (fs::path(dir) / (name + ".cfg")).string();
      std::ofstream f(path);
      f << preset_text(name);
      if (!f) throw Error("cannot write " + path);
      out << path << '\n';
    }
    return 0;
  });
}

}  // namespace vgan
