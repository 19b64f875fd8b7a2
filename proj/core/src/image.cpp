#include "gsedit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace gsedit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decodes any 8/16-bit PNG into packed 8-bit RGB rows.
void read_png_rgb8(const std::filesystem::path& path, int& width, int& height,
                   std::vector<std::uint8_t>& rgb) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open png: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode png: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_expand(png);           // palette/gray<8/tRNS -> 8-bit
  png_set_strip_16(png);         // 16-bit -> 8-bit
  png_set_strip_alpha(png);      // drop alpha
  png_set_gray_to_rgb(png);      // gray -> rgb
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unexpected png row size: " + path.string());
  }

  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = rgb.data() + static_cast<std::size_t>(y) * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

void write_png_rows(const std::filesystem::path& path, int width, int height, int color_type,
                    const std::uint8_t* bytes, std::size_t rowbytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write png: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode png: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes + static_cast<std::size_t>(y) * rowbytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  std::vector<std::uint8_t> rgb;
  read_png_rgb8(path, w, h, rgb);
  Image img(w, h);
  for (std::size_t i = 0; i < rgb.size(); ++i) img.data[i] = rgb[i] / 255.0;
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  if (img.width <= 0 || img.height <= 0) throw std::invalid_argument("save_png: empty image");
  std::vector<std::uint8_t> rgb(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) rgb[i] = quantize(img.data[i]);
  write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, rgb.data(),
                 static_cast<std::size_t>(img.width) * 3);
}

Mask load_mask_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  std::vector<std::uint8_t> rgb;
  read_png_rgb8(path, w, h, rgb);
  Mask mask;
  mask.width = w;
  mask.height = h;
  mask.data.resize(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    const std::uint8_t* px = rgb.data() + 3 * i;
    mask.data[i] = (px[0] || px[1] || px[2]) ? 1 : 0;
  }
  return mask;
}

void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) gray[i] = mask.data[i] ? 255 : 0;
  write_png_rows(path, mask.width, mask.height, PNG_COLOR_TYPE_GRAY, gray.data(),
                 static_cast<std::size_t>(mask.width));
}

}  // namespace gsedit
