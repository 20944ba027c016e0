#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <vector>

#include "speckle/common.hpp"
#include "speckle/io.hpp"

namespace speckle::io {
namespace {

Image<uint16_t> normalize_to_u8(const Image<double>& img) {
  double mn = 1e300, mx = -1e300;
  for (size_t i = 0; i < img.size(); ++i) {
    mn = std::min(mn, img.data()[i]);
    mx = std::max(mx, img.data()[i]);
  }
  const double scale = mx > mn ? 255.0 / (mx - mn) : 0.0;
  Image<uint16_t> out(img.h(), img.w());
  for (size_t i = 0; i < img.size(); ++i) {
    out.data()[i] = uint16_t(std::lround((img.data()[i] - mn) * scale));
  }
  return out;
}

void write_png_gray8(const std::string& path, const Image<uint16_t>& img) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("png: cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(f);
    throw IoError("png: encoder failure: " + path);
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, img.w(), img.h(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint8_t> row(img.w());
  for (int y = 0; y < img.h(); ++y) {
    for (int x = 0; x < img.w(); ++x) row[x] = uint8_t(img.at(y, x));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

void export_grayscale(const std::string& path, const Image<double>& img) {
  if (img.empty()) throw IoError("export: empty image");
  auto u8 = normalize_to_u8(img);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
    write_png_gray8(path, u8);
  } else if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") {
    write_pgm(path, u8, 8);
  } else {
    throw ConfigError("export: unsupported image extension (use .png or .pgm): " + path);
  }
}

}  // namespace speckle::io
