// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/studio/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace vgan {

// ---------------------------------------------------------------- expressions

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad expression '" + s_ + "': " + why);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }
  double primary() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (s_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return std::numbers::pi;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(pos_ < s_.size() ? "unexpected '" + s_.substr(pos_) + "'" : "empty");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) { return evaluate_expression(s); }

std::int64_t to_int(const std::string& s) {
  const double v = evaluate_expression(s);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError("'" + s + "' is not an integer");
  return static_cast<std::int64_t>(v);
}

std::uint64_t to_uint(const std::string& s) {
  const std::string t = trim(s);
  if (!t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ConfigError("'" + s + "' is out of range");
    return v;
  }
  const std::int64_t v = to_int(s);
  if (v < 0) throw ConfigError("'" + s + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError("'" + s + "' is not a boolean");
}

std::vector<std::int64_t> to_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  if (trim(s).empty()) return out;
  for (const auto& p : split(s, ',')) out.push_back(to_int(p));
  return out;
}

std::string int_list(const std::vector<std::int64_t>& v) {
  std::string out;
  for (auto x : v) out += (out.empty() ? "" : ", ") + std::to_string(x);
  return out;
}

// "lo, hi" or "centre +- half".
std::pair<double, double> to_range(const std::string& s) {
  const auto pm = s.find("+-");
  if (pm != std::string::npos) {
    const double c = to_double(s.substr(0, pm)), h = to_double(s.substr(pm + 2));
    return {c - h, c + h};
  }
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("range '" + s + "' needs 'lo, hi' or 'centre +- half'");
  return {to_double(parts[0]), to_double(parts[1])};
}

std::string range(double lo, double hi) { return num(lo) + ", " + num(hi); }

struct Key {
  const char* section;
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class M>
Key double_key(const char* sec, const char* name, M member) {
  return {sec, name, [member](const RunConfig& c) { return num(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) { member(c) = to_double(v); }};
}
template <class M>
Key int_key(const char* sec, const char* name, M member) {
  return {sec, name,
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            member(c) = static_cast<T>(to_int(v));
          }};
}
template <class M>
Key uint_key(const char* sec, const char* name, M member) {
  return {sec, name,
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) { member(c) = to_uint(v); }};
}
template <class M>
Key bool_key(const char* sec, const char* name, M member) {
  return {sec, name,
          [member](const RunConfig& c) {
            return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [member](RunConfig& c, const std::string& v) { member(c) = to_bool(v); }};
}
template <class M>
Key list_key(const char* sec, const char* name, M member) {
  return {sec, name, [member](const RunConfig& c) { return int_list(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, const std::string& v) { member(c) = to_int_list(v); }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    // [dataset]
    k.push_back({"dataset", "source",
                 [](const RunConfig& c) {
                   return std::string(c.dataset.source == DataSource::folder ? "folder" : "synthetic");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "folder")
                     c.dataset.source = DataSource::folder;
                   else if (v == "synthetic")
                     c.dataset.source = DataSource::synthetic;
                   else
                     throw ConfigError("source must be 'folder' or 'synthetic'");
                 }});
    k.push_back({"dataset", "path", [](const RunConfig& c) { return c.dataset.path; },
                 [](RunConfig& c, const std::string& v) { c.dataset.path = v; }});
    k.push_back(int_key("dataset", "resolution", [](RunConfig& c) -> int& { return c.dataset.resolution; }));
    k.push_back({"dataset", "crop",
                 [](const RunConfig& c) { return std::string(c.dataset.center_crop ? "center" : "none"); },
                 [](RunConfig& c, const std::string& v) {
                   if (v != "center" && v != "none") throw ConfigError("crop must be 'center' or 'none'");
                   c.dataset.center_crop = v == "center";
                 }});
    k.push_back(uint_key("dataset", "shuffle_seed", [](RunConfig& c) -> std::uint64_t& { return c.dataset.shuffle_seed; }));
    k.push_back(int_key("dataset", "count", [](RunConfig& c) -> int& { return c.synthetic_count; }));
    k.push_back(uint_key("dataset", "synthetic_seed", [](RunConfig& c) -> std::uint64_t& { return c.synthetic_seed; }));

    // [camera]
    auto cam = [](RunConfig& c) -> CameraConfig& { return c.train.generator.camera; };
    k.push_back(double_key("camera", "fov", [cam](RunConfig& c) -> double& { return cam(c).fov_deg; }));
    k.push_back({"camera", "range_depth", [cam](const RunConfig& c) {
                   auto& m = cam(const_cast<RunConfig&>(c));
                   return range(m.near, m.far);
                 },
                 [cam](RunConfig& c, const std::string& v) {
                   std::tie(cam(c).near, cam(c).far) = to_range(v);
                 }});
    k.push_back(int_key("camera", "steps", [cam](RunConfig& c) -> int& { return cam(c).n_steps; }));
    k.push_back({"camera", "range_h", [cam](const RunConfig& c) {
                   auto& m = cam(const_cast<RunConfig&>(c));
                   return range(m.h_lo, m.h_hi);
                 },
                 [cam](RunConfig& c, const std::string& v) { std::tie(cam(c).h_lo, cam(c).h_hi) = to_range(v); }});
    k.push_back({"camera", "range_v", [cam](const RunConfig& c) {
                   auto& m = cam(const_cast<RunConfig&>(c));
                   return range(m.v_lo, m.v_hi);
                 },
                 [cam](RunConfig& c, const std::string& v) { std::tie(cam(c).v_lo, cam(c).v_hi) = to_range(v); }});
    k.push_back({"camera", "sample_dist",
                 [cam](const RunConfig& c) {
                   return std::string(cam(const_cast<RunConfig&>(c)).dist == SampleDist::gaussian ? "gaussian"
                                                                                                   : "uniform");
                 },
                 [cam](RunConfig& c, const std::string& v) {
                   if (v == "gaussian")
                     cam(c).dist = SampleDist::gaussian;
                   else if (v == "uniform")
                     cam(c).dist = SampleDist::uniform;
                   else
                     throw ConfigError("sample_dist must be 'gaussian' or 'uniform'");
                 }});
    k.push_back(int_key("camera", "ray_res", [cam](RunConfig& c) -> int& { return cam(c).ray_res; }));
    k.push_back(double_key("camera", "radius", [cam](RunConfig& c) -> double& { return cam(c).radius; }));

    // [mapping]
    auto map = [](RunConfig& c) -> MappingConfig& { return c.train.generator.mapping; };
    k.push_back(int_key("mapping", "latent_dim", [map](RunConfig& c) -> std::int64_t& { return map(c).latent_dim; }));
    k.push_back(int_key("mapping", "width", [map](RunConfig& c) -> std::int64_t& { return map(c).width; }));
    k.push_back(int_key("mapping", "depth", [map](RunConfig& c) -> int& { return map(c).depth; }));

    // [structural]
    auto st = [](RunConfig& c) -> StructuralConfig& { return c.train.generator.structural; };
    k.push_back(int_key("structural", "template_channels", [st](RunConfig& c) -> std::int64_t& { return st(c).template_channels; }));
    k.push_back(int_key("structural", "template_res", [st](RunConfig& c) -> std::int64_t& { return st(c).template_res; }));
    k.push_back(list_key("structural", "stage_channels", [st](RunConfig& c) -> std::vector<std::int64_t>& { return st(c).stage_channels; }));

    // [field]
    auto fd = [](RunConfig& c) -> FieldConfig& { return c.train.generator.field; };
    k.push_back(int_key("field", "hidden", [fd](RunConfig& c) -> std::int64_t& { return fd(c).hidden; }));
    k.push_back(int_key("field", "layers", [fd](RunConfig& c) -> int& { return fd(c).layers; }));
    k.push_back(int_key("field", "feature_dim", [fd](RunConfig& c) -> std::int64_t& { return fd(c).feature_dim; }));
    k.push_back({"field", "gamma0", [](const RunConfig& c) { return num(c.train.generator.field.gamma0); },
                 [](RunConfig& c, const std::string& v) {
                   c.train.generator.field.gamma0 = to_double(v);
                   c.train.generator.mapping.film_gamma0 = c.train.generator.field.gamma0;
                 }});

    // [renderer]
    auto rn = [](RunConfig& c) -> RendererConfig& { return c.train.generator.renderer; };
    k.push_back(list_key("renderer", "stage_channels", [rn](RunConfig& c) -> std::vector<std::int64_t>& { return rn(c).stage_channels; }));
    k.push_back(int_key("renderer", "torgb_kernel", [rn](RunConfig& c) -> int& { return rn(c).torgb_kernel; }));
    k.push_back(bool_key("renderer", "demod", [rn](RunConfig& c) -> bool& { return rn(c).demod; }));

    // [discriminator]
    auto dc = [](RunConfig& c) -> DiscriminatorConfig& { return c.train.discriminator; };
    k.push_back(int_key("discriminator", "max_res", [dc](RunConfig& c) -> int& { return dc(c).max_res; }));
    k.push_back(int_key("discriminator", "base_channels", [dc](RunConfig& c) -> std::int64_t& { return dc(c).base_channels; }));
    k.push_back(int_key("discriminator", "max_channels", [dc](RunConfig& c) -> std::int64_t& { return dc(c).max_channels; }));

    // [train]
    auto tr = [](RunConfig& c) -> TrainConfig& { return c.train; };
    k.push_back(int_key("train", "batch", [tr](RunConfig& c) -> std::int64_t& { return tr(c).batch; }));
    k.push_back(double_key("train", "g_lr", [tr](RunConfig& c) -> double& { return tr(c).g_adam.lr; }));
    k.push_back(double_key("train", "d_lr", [tr](RunConfig& c) -> double& { return tr(c).d_adam.lr; }));
    k.push_back({"train", "betas",
                 [](const RunConfig& c) { return range(c.train.g_adam.beta0, c.train.g_adam.beta1); },
                 [](RunConfig& c, const std::string& v) {
                   const auto [b0, b1] = to_range(v);
                   c.train.g_adam.beta0 = c.train.d_adam.beta0 = b0;
                   c.train.g_adam.beta1 = c.train.d_adam.beta1 = b1;
                 }});
    k.push_back({"train", "adam_eps", [](const RunConfig& c) { return num(c.train.g_adam.eps); },
                 [](RunConfig& c, const std::string& v) { c.train.g_adam.eps = c.train.d_adam.eps = to_double(v); }});
    k.push_back(double_key("train", "lambda", [tr](RunConfig& c) -> double& { return tr(c).lambda; }));
    k.push_back({"train", "schedule",
                 [](const RunConfig& c) {
                   std::string out;
                   for (const auto& s : c.train.schedule)
                     out += (out.empty() ? "" : ", ") + std::to_string(s.resolution) + ":" + num(s.kimg);
                   return out;
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.train.schedule.clear();
                   for (const auto& item : split(v, ',')) {
                     const auto colon = item.find(':');
                     if (colon == std::string::npos)
                       throw ConfigError("schedule entries are 'resolution:kimg', got '" + item + "'");
                     c.train.schedule.push_back({static_cast<int>(to_int(item.substr(0, colon))),
                                                 to_double(item.substr(colon + 1))});
                   }
                 }});
    k.push_back(double_key("train", "fade_fraction", [tr](RunConfig& c) -> double& { return tr(c).fade_fraction; }));
    k.push_back(bool_key("train", "stratified", [tr](RunConfig& c) -> bool& { return tr(c).stratified; }));
    k.push_back(uint_key("train", "seed", [tr](RunConfig& c) -> std::uint64_t& { return tr(c).seed; }));
    k.push_back({"train", "dtype", [](const RunConfig& c) { return std::string(dtype_name(c.train.generator.dtype)); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "f32")
                     c.train.generator.dtype = DType::f32;
                   else if (v == "f64")
                     c.train.generator.dtype = DType::f64;
                   else
                     throw ConfigError("dtype must be 'f32' or 'f64'");
                 }});

    // [output]
    k.push_back({"output", "dir", [](const RunConfig& c) { return c.out_dir; },
                 [](RunConfig& c, const std::string& v) { c.out_dir = v; }});
    k.push_back(uint_key("output", "checkpoint_every", [](RunConfig& c) -> std::uint64_t& { return c.checkpoint_every; }));
    k.push_back(uint_key("output", "sample_every", [](RunConfig& c) -> std::uint64_t& { return c.sample_every; }));
    return k;
  }();
  return keys;
}

// Widths that are implied by others rather than set directly.
void derive(RunConfig& c) {
  auto& g = c.train.generator;
  if (!g.structural.stage_channels.empty()) g.field.descriptor_dim = g.structural.stage_channels.back();
  g.renderer.feature_dim = g.field.feature_dim;
  g.mapping.film_gamma0 = g.field.gamma0;
  c.train.shuffle_seed = c.dataset.shuffle_seed;
}

}  // namespace

double evaluate_expression(const std::string& text) { return ExprParser(text).parse(); }

void RunConfig::validate() const {
  train.validate();
  if (dataset.resolution <= 0 || (dataset.resolution & (dataset.resolution - 1)))
    throw ConfigError("dataset.resolution must be a power of two");
  if (dataset.resolution < train.schedule.back().resolution)
    throw ConfigError("dataset.resolution is below the final schedule resolution");
  if (dataset.source == DataSource::folder && dataset.path.empty())
    throw ConfigError("dataset.path is required for folder sources");
  if (dataset.source == DataSource::synthetic && synthetic_count < 1)
    throw ConfigError("dataset.count must be positive");
  if (out_dir.empty()) throw ConfigError("output.dir must not be empty");
}

SyntheticSceneConfig RunConfig::synthetic() const {
  SyntheticSceneConfig s;
  s.count = synthetic_count;
  s.resolution = dataset.resolution;
  s.camera = train.generator.camera;
  s.seed = synthetic_seed;
  return s;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& k : registry()) known |= section == k.section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const Key* match = nullptr;
    for (const auto& k : registry())
      if (section == k.section && key == k.name) match = &k;
    if (!match) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (std::find(seen.begin(), seen.end(), full) != seen.end())
      throw ConfigError(where + "duplicate key '" + full + "'");
    seen.push_back(full);
    try {
      match->set(cfg, value);
    } catch (const Error& e) {
      throw ConfigError(where + full + ": " + e.what());
    }
  }
  derive(cfg);
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& k : registry()) {
    if (section != k.section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_run_config(a) == serialize_run_config(b);
}

}  // namespace vgan
