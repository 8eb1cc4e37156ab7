#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tape.hpp"
#include "vgan/evalkit/marching_cubes.hpp"
#include "vgan/evalkit/metrics.hpp"
#include "vgan/renderer/generator.hpp"
#include "vgan/renderer/volume_render.hpp"
#include "vgan/studio/config.hpp"
#include "vgan/trainer/checkpoint.hpp"
#include "vgan/trainer/trainer.hpp"

namespace py = pybind11;
using namespace vgan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a, DType dtype) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  if (shape.empty()) shape = {1};
  return Tensor::from(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())), shape, dtype);
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  const auto v = t.values();
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Eigen::MatrixXd to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D feature array");
  Eigen::MatrixXd m(a.shape(0), a.shape(1));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
  return m;
}

RunConfig config_from(const std::string& text) {
  if (text.rfind("preset:", 0) == 0) return preset(text.substr(7));
  RunConfig c = parse_run_config(text);
  c.validate();
  return c;
}

// Generator plus the config it was built from.
class PyGenerator {
 public:
  PyGenerator(const std::string& config, std::uint64_t seed) : cfg_(config_from(config)) {
    Rng rng(seed);
    g_ = std::make_unique<Generator>(cfg_.train.generator, rng);
  }
  PyGenerator(const std::string& config, const std::string& checkpoint) : cfg_(config_from(config)) {
    g_ = generator_from_checkpoint(cfg_.train, load_checkpoint(checkpoint, config_hash(cfg_.train)));
  }

  std::int64_t latent_dim() const { return cfg_.train.latent_dim(); }
  int output_res() const { return g_->output_res(); }

  Array sample_latent(std::int64_t count, std::uint64_t seed) const {
    Rng rng(seed);
    return to_array(vgan::sample_latent(count, latent_dim(), rng, DType::f64));
  }

  py::dict render(const Array& z, double yaw, double pitch, const std::optional<Array>& z_texture,
                  const std::optional<Array>& z_renderer) const {
    const DType dt = cfg_.train.generator.dtype;
    auto code = [&](const Array& a) {
      Tensor t = to_tensor(a, dt);
      return t.rank() == 1 ? t.alias({1, t.numel()}) : t;
    };
    const Tensor zs = code(z);
    const CodeBundle codes{zs, z_texture ? code(*z_texture) : zs, z_renderer ? code(*z_renderer) : zs};
    RenderRequest req;
    req.poses.assign(static_cast<std::size_t>(codes.batch()),
                     CameraPose::from_yaw_pitch(yaw, pitch, cfg_.train.camera().radius));
    NoGradScope ng;
    const GeneratorOutput out = g_->forward(codes, req);
    py::dict d;
    d["image"] = to_array(out.image);
    d["feature_map"] = to_array(out.feature_map);
    d["sigma"] = to_array(out.sigma);
    return d;
  }

  Array density(const Array& z, const Array& points, const std::optional<Array>& z_renderer) const {
    if (points.ndim() != 2 || points.shape(1) != 3) throw ShapeError("points must be [N, 3]");
    const DType dt = cfg_.train.generator.dtype;
    const Tensor zs = to_tensor(z, dt).alias({1, latent_dim()});
    const Tensor zr = z_renderer ? to_tensor(*z_renderer, dt).alias({1, latent_dim()}) : zs;
    const std::vector<double> pts(points.data(), points.data() + points.size());
    const auto sigma = g_->density(CodeBundle{zs, zs, zr}, pts);
    Array out(static_cast<py::ssize_t>(sigma.size()));
    std::copy(sigma.begin(), sigma.end(), out.mutable_data());
    return out;
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<Generator> g_;
};

class PyTrainer {
 public:
  explicit PyTrainer(const std::string& config) : cfg_(config_from(config)) {
    if (cfg_.dataset.source == DataSource::folder)
      data_ = load_folder(cfg_.dataset);
    else
      data_ = generate_synthetic(cfg_.synthetic()).images;
    t_ = std::make_unique<Trainer>(cfg_.train, data_);
  }

  py::dict step() {
    const LossReport r = t_->step();
    py::dict d;
    d["step"] = r.step;
    d["resolution"] = r.resolution;
    d["alpha"] = r.alpha;
    d["d_loss"] = r.d_loss;
    d["g_loss"] = r.g_loss;
    d["r1"] = r.r1;
    d["d_accuracy"] = r.d_accuracy;
    return d;
  }

  bool done() const { return t_->done(); }
  std::uint64_t steps() const { return t_->steps(); }
  bool finite() const {
    return t_->generator().params().all_finite() && t_->discriminator().params().all_finite();
  }
  void save(const std::string& path) const { save_checkpoint(t_->checkpoint(), path); }
  void load(const std::string& path) { t_->restore(load_checkpoint(path, config_hash(cfg_.train))); }

 private:
  RunConfig cfg_;
  ImageDataset data_;
  std::unique_ptr<Trainer> t_;
};

}  // namespace

PYBIND11_MODULE(_vgan, m) {
  m.doc() = "Compositional 3D-aware image generator (native core)";

  static py::exception<Error> base(m, "VganError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<CheckpointError> checkpoint_error(m, "CheckpointError", base.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const CheckpointError& e) {
      checkpoint_error(e.what());
    } catch (const NumericError& e) {
      numeric_error(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("presets", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def("validate_config", [](const std::string& text) { config_from(text); }, py::arg("text"),
        "Raises ConfigError when the text does not describe a valid run.");
  m.def("evaluate_expression", &evaluate_expression, py::arg("text"));

  m.def(
      "accumulate",
      [](const Array& sigma, const Array& delta, const Array& feature) {
        const Accumulated a = accumulate(to_tensor(sigma, DType::f64), to_tensor(delta, DType::f64),
                                         to_tensor(feature, DType::f64));
        return py::make_tuple(to_array(a.feature), to_array(a.rays.weights));
      },
      py::arg("sigma"), py::arg("delta"), py::arg("feature"),
      "Volume-rendering weights along the last sample axis. Returns (feature, weights).");

  m.def(
      "frechet_distance", [](const Array& a, const Array& b) { return frechet_distance(to_matrix(a), to_matrix(b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "marching_cubes",
      [](const Array& values, double iso, double lo, double hi) {
        if (values.ndim() != 3 || values.shape(0) != values.shape(1) || values.shape(1) != values.shape(2))
          throw ShapeError("values must be a cubic [n, n, n] grid");
        ScalarGrid g;
        g.n = static_cast<int>(values.shape(0));
        g.lo = lo;
        g.hi = hi;
        g.values.assign(values.data(), values.data() + values.size());
        const Mesh mesh = marching_cubes(g, iso);
        Array verts({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{3}});
        py::array_t<int> faces({static_cast<py::ssize_t>(mesh.triangles.size()), py::ssize_t{3}});
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
          for (int k = 0; k < 3; ++k) verts.mutable_at(i, k) = mesh.vertices[i][k];
        for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
          for (int k = 0; k < 3; ++k) faces.mutable_at(i, k) = mesh.triangles[i][static_cast<std::size_t>(k)];
        return py::make_tuple(verts, faces);
      },
      py::arg("values"), py::arg("iso") = kDefaultIsoThreshold, py::arg("lo") = -1.0, py::arg("hi") = 1.0,
      "values[z, y, x] sampled on grid nodes spanning [lo, hi] per axis.");

  py::class_<PyGenerator>(m, "Generator")
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("config"), py::arg("seed") = 0)
      .def(py::init<const std::string&, const std::string&>(), py::arg("config"), py::arg("checkpoint"))
      .def_property_readonly("latent_dim", &PyGenerator::latent_dim)
      .def_property_readonly("output_res", &PyGenerator::output_res)
      .def("sample_latent", &PyGenerator::sample_latent, py::arg("count") = 1, py::arg("seed") = 0)
      .def("render", &PyGenerator::render, py::arg("z"), py::arg("yaw") = 0.0, py::arg("pitch") = 0.0,
           py::arg("z_texture") = py::none(), py::arg("z_renderer") = py::none())
      .def("density", &PyGenerator::density, py::arg("z"), py::arg("points"), py::arg("z_renderer") = py::none());

  py::class_<PyTrainer>(m, "Trainer")
      .def(py::init<const std::string&>(), py::arg("config"))
      .def("step", &PyTrainer::step)
      .def_property_readonly("done", &PyTrainer::done)
      .def_property_readonly("steps", &PyTrainer::steps)
      .def("finite", &PyTrainer::finite)
      .def("save", &PyTrainer::save, py::arg("path"))
      .def("load", &PyTrainer::load, py::arg("path"));
}
