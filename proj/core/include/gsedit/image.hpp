#pragma once

#include "gsedit/math.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gsedit {

/// Row-major H x W RGB image, values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // height*width*3

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  double& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  Vec3 pixel(int y, int x) const { return {at(y, x, 0), at(y, x, 1), at(y, x, 2)}; }
  void set_pixel(int y, int x, const Vec3& rgb) {
    at(y, x, 0) = rgb.x();
    at(y, x, 1) = rgb.y();
    at(y, x, 2) = rgb.z();
  }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

  static Image constant(int w, int h, const Vec3& rgb) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.set_pixel(y, x, rgb);
    return img;
  }
};

/// Single-channel mask; nonzero = supervised pixel.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  bool at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Decodes an 8-bit PNG (gray, palette, RGB or RGBA; alpha dropped) to RGB doubles.
Image load_png(const std::filesystem::path& path);

/// Encodes as 8-bit RGB with round-to-nearest quantization.
void save_png(const Image& img, const std::filesystem::path& path);

Mask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const Mask& mask, const std::filesystem::path& path);

}  // namespace gsedit
