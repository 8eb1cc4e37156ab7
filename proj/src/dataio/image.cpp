// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/dataio/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace vgan {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::string magic;
  is >> magic;
  if (magic != "P6") throw Error("'" + path + "' is not a binary PPM");
  auto next_int = [&]() {
    while (true) {
      is >> std::ws;
      if (is.peek() == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      int v = -1;
      is >> v;
      if (!is) throw Error("malformed PPM header in '" + path + "'");
      return v;
    }
  };
  Image img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (maxval != 255 || img.width <= 0 || img.height <= 0)
    throw Error("unsupported PPM layout in '" + path + "'");
  is.get();
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  is.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.rgb.size()))
    throw Error("truncated PPM '" + path + "'");
  return img;
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!os) throw Error("failed writing '" + path + "'");
}

Image read_png(const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str()))
    throw Error("cannot decode PNG '" + path + "': " + pi.message);
  pi.format = PNG_FORMAT_RGB;
  Image img;
  img.width = static_cast<int>(pi.width);
  img.height = static_cast<int>(pi.height);
  img.rgb.resize(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&pi);
    throw Error("cannot decode PNG '" + path + "': " + pi.message);
  }
  return img;
}

void write_png(const Image& img, const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.rgb.data(), 0, nullptr))
    throw Error("cannot write PNG '" + path + "': " + pi.message);
}

}  // namespace

Image read_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error("cannot open '" + path + "'");
  unsigned char sig[8] = {};
  const std::size_t n = std::fread(sig, 1, 8, f.get());
  f.reset();
  if (n >= 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (n >= 2 && sig[0] == 'P' && sig[1] == '6') return read_ppm(path);
  throw Error("'" + path + "' is neither PNG nor binary PPM");
}

void write_image(const Image& image, const std::string& path, ImageFormat format) {
  if (format == ImageFormat::png)
    write_png(image, path);
  else
    write_ppm(image, path);
}

ImageFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "png") return ImageFormat::png;
  }
  return ImageFormat::ppm;
}

Image tensor_to_image(const Tensor& chw) {
  if (chw.rank() != 3 || chw.size(0) != 3)
    throw ShapeError("tensor_to_image expects [3, H, W], got " + shape_str(chw.shape()));
  if (!all_finite(chw)) throw NumericError("tensor_to_image: non-finite pixel values");
  Image img;
  img.height = static_cast<int>(chw.size(1));
  img.width = static_cast<int>(chw.size(2));
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  const std::vector<double> v = chw.values();
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < plane; ++p) {
      const double q = std::round((v[c * plane + p] + 1.0) * 127.5);
      img.rgb[p * 3 + c] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
    }
  return img;
}

Tensor image_to_tensor(const Image& img, DType dtype) {
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  std::vector<double> v(plane * 3);
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < plane; ++p) v[c * plane + p] = img.rgb[p * 3 + c] / 127.5 - 1.0;
  return Tensor::from(v, {3, img.height, img.width}, dtype);
}

Image center_crop(const Image& img) {
  const int s = std::min(img.width, img.height);
  const int x0 = (img.width - s) / 2, y0 = (img.height - s) / 2;
  Image out;
  out.width = out.height = s;
  out.rgb.resize(static_cast<std::size_t>(s) * s * 3);
  for (int r = 0; r < s; ++r)
    std::copy_n(&img.rgb[(static_cast<std::size_t>(r + y0) * img.width + x0) * 3],
                static_cast<std::size_t>(s) * 3, &out.rgb[static_cast<std::size_t>(r) * s * 3]);
  return out;
}

Image area_resize(const Image& img, int size) {
  if (size <= 0) throw Error("area_resize: target size must be positive");
  if (img.width == size && img.height == size) return img;
  // Separable box filter: each output cell averages its exact source footprint.
  auto weights = [](int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int o = 0; o < dst; ++o) {
      const double a = o * scale, b = (o + 1) * scale;
      for (int i = static_cast<int>(std::floor(a)); i < std::min(src, static_cast<int>(std::ceil(b))); ++i) {
        const double overlap = std::min(b, i + 1.0) - std::max(a, static_cast<double>(i));
        if (overlap > 0) w[static_cast<std::size_t>(o)].emplace_back(i, overlap / scale);
      }
    }
    return w;
  };
  const auto wx = weights(img.width, size), wy = weights(img.height, size);
  Image out;
  out.width = out.height = size;
  out.rgb.resize(static_cast<std::size_t>(size) * size * 3);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (auto [yi, wyv] : wy[static_cast<std::size_t>(r)])
          for (auto [xi, wxv] : wx[static_cast<std::size_t>(c)]) acc += wyv * wxv * img.at(yi, xi, ch);
        out.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::round(acc), 0.0, 255.0));
      }
  return out;
}

}  // namespace vgan
