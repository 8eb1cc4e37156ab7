// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

/// 8-bit interleaved RGB raster.
struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t& at(int row, int col, int ch) {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  std::uint8_t at(int row, int col, int ch) const {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
};

enum class ImageFormat { ppm, png };

/// Decodes PNG or binary PPM (P6, maxval 255), chosen by the file signature.
Image read_image(const std::string& path);
void write_image(const Image& image, const std::string& path, ImageFormat format);
/// Format from the extension (.png, otherwise PPM).
ImageFormat format_for_path(const std::string& path);

/// [3, H, W] in [−1, 1] ↔ bytes via round((v + 1)·127.5), clamped.
Image tensor_to_image(const Tensor& chw);
Tensor image_to_tensor(const Image& image, DType dtype = DType::f32);

/// Largest centred square.
Image center_crop(const Image& image);
/// Box-filter resampling to size × size (exact area weights).
Image area_resize(const Image& image, int size);

}  // namespace vgan
