#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpcam/errors.hpp"

namespace gpcam {

// 8-bit raster, row-major, 1 (gray) or 3 (RGB) channels.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  static RasterImage create(int width, int height, int channels,
                            std::uint8_t fill = 0);
  bool valid() const {
    return width > 0 && height > 0 && (channels == 1 || channels == 3) &&
           data.size() == static_cast<size_t>(width) * height * channels;
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  RasterImage to_gray() const;
};

// Format chosen by extension: .pgm (P5), .ppm (P6), .png.
RasterImage read_image(const std::string& path);
void write_image(const std::string& path, const RasterImage& img);

}  // namespace gpcam
