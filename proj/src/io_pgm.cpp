#include <cstdio>
#include <memory>

#include "speckle/common.hpp"
#include "speckle/io.hpp"

namespace speckle::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Next whitespace-delimited token, skipping '#' comments per the PGM spec.
int next_token(std::FILE* f, char* buf, int cap) {
  int c;
  do {
    c = std::fgetc(f);
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    }
  } while (c == ' ' || c == '\t' || c == '\n' || c == '\r');
  int len = 0;
  while (c != EOF && c != ' ' && c != '\t' && c != '\n' && c != '\r') {
    if (len + 1 >= cap) return -1;
    buf[len++] = char(c);
    c = std::fgetc(f);
  }
  buf[len] = '\0';
  return len;
}

long parse_positive(const char* s) {
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v <= 0) return -1;
  return v;
}

}  // namespace

void write_pgm(const std::string& path, const Image<uint16_t>& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw IoError("pgm: bit depth must be 8 or 16");
  const int maxval = (1 << bit_depth) - 1;
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("pgm: cannot open for writing: " + path);
  std::fprintf(f.get(), "P5\n%d %d\n%d\n", img.w(), img.h(), maxval);
  if (bit_depth == 8) {
    std::vector<uint8_t> row(img.w());
    for (int y = 0; y < img.h(); ++y) {
      for (int x = 0; x < img.w(); ++x) row[x] = uint8_t(img.at(y, x));
      if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size()) {
        throw IoError("pgm: short write: " + path);
      }
    }
  } else {
    std::vector<uint8_t> row(size_t(img.w()) * 2);
    for (int y = 0; y < img.h(); ++y) {
      for (int x = 0; x < img.w(); ++x) {
        row[2 * x] = uint8_t(img.at(y, x) >> 8);  // big-endian samples
        row[2 * x + 1] = uint8_t(img.at(y, x) & 0xFF);
      }
      if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size()) {
        throw IoError("pgm: short write: " + path);
      }
    }
  }
}

Image<uint16_t> read_pgm(const std::string& path, int* bit_depth_out) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("pgm: cannot open: " + path);
  char tok[64];
  if (next_token(f.get(), tok, sizeof tok) <= 0 || std::string(tok) != "P5") {
    throw IoError("pgm: not a binary PGM (bad magic): " + path);
  }
  long w = -1, h = -1, maxval = -1;
  if (next_token(f.get(), tok, sizeof tok) > 0) w = parse_positive(tok);
  if (next_token(f.get(), tok, sizeof tok) > 0) h = parse_positive(tok);
  if (next_token(f.get(), tok, sizeof tok) > 0) maxval = parse_positive(tok);
  if (w <= 0 || h <= 0 || (maxval != 255 && maxval != 65535)) {
    throw IoError("pgm: malformed header: " + path);
  }
  if (bit_depth_out) *bit_depth_out = maxval == 255 ? 8 : 16;

  const int wi = int(w), hi = int(h);
  Image<uint16_t> img(hi, wi);
  if (maxval == 255) {
    std::vector<uint8_t> row(size_t(w), 0);
    for (int y = 0; y < h; ++y) {
      if (std::fread(row.data(), 1, row.size(), f.get()) != row.size()) {
        throw IoError("pgm: truncated payload: " + path);
      }
      for (int x = 0; x < w; ++x) img.at(y, x) = row[x];
    }
  } else {
    std::vector<uint8_t> row(size_t(w) * 2);
    for (int y = 0; y < h; ++y) {
      if (std::fread(row.data(), 1, row.size(), f.get()) != row.size()) {
        throw IoError("pgm: truncated payload: " + path);
      }
      for (int x = 0; x < w; ++x) {
        img.at(y, x) = uint16_t((uint16_t(row[2 * x]) << 8) | row[2 * x + 1]);
      }
    }
  }
  return img;
}

}  // namespace speckle::io
