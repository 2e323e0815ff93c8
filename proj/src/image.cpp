#include "gpcam/image.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>

namespace gpcam {

RasterImage RasterImage::create(int width, int height, int channels,
                                std::uint8_t fill) {
  RasterImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(static_cast<size_t>(width) * height * channels, fill);
  return img;
}

RasterImage RasterImage::to_gray() const {
  if (channels == 1) return *this;
  RasterImage g = create(width, height, 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int v = 299 * at(x, y, 0) + 587 * at(x, y, 1) + 114 * at(x, y, 2);
      g.at(x, y) = static_cast<std::uint8_t>(v / 1000);
    }
  return g;
}

namespace {

std::string lower_ext(const std::string& path) {
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

RasterImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw IoError(path + ": not P5/P6 PNM");

  auto next_token = [&]() -> long {
    // Skips whitespace and '#' comments.
    while (true) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v;
    if (!(in >> v)) throw IoError(path + ": malformed PNM header");
    return v;
  };

  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || maxval != 255)
    throw IoError(path + ": unsupported PNM dimensions or maxval");
  in.get();  // single whitespace after maxval

  RasterImage img = RasterImage::create(static_cast<int>(w),
                                        static_cast<int>(h),
                                        magic == "P5" ? 1 : 3);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw IoError(path + ": truncated PNM payload");
  return img;
}

void write_pnm(const std::string& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("short write to " + path);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

RasterImage read_png(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  RasterImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": corrupt or unsupported PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = static_cast<int>(png_get_channels(png, info));
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG channel count");
  }
  img = RasterImage::create(w, h, ch);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[static_cast<size_t>(y)] =
        img.data.data() + static_cast<size_t>(y) * w * ch;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const RasterImage& img) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": PNG write failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(
                           img.data.data() +
                           static_cast<size_t>(y) * img.width * img.channels));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RasterImage read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "pgm" || ext == "ppm") return read_pnm(path);
  if (ext == "png") return read_png(path);
  throw IoError(path + ": unsupported image format '" + ext + "'");
}

void write_image(const std::string& path, const RasterImage& img) {
  if (!img.valid()) throw IoError("write_image: malformed raster");
  const std::string ext = lower_ext(path);
  if (ext == "pgm") {
    write_pnm(path, img.to_gray());
  } else if (ext == "ppm") {
    if (img.channels != 3) throw IoError("PPM requires 3 channels");
    write_pnm(path, img);
  } else if (ext == "png") {
    write_png(path, img);
  } else {
    throw IoError(path + ": unsupported image format '" + ext + "'");
  }
}

}  // namespace gpcam
