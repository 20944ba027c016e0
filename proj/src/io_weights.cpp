#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>

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

constexpr char kMagic[4] = {'S', 'P', 'K', 'W'};

// All integers little-endian on disk.
template <typename T>
void put(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(char((uint64_t(v) >> (8 * i)) & 0xFF));
}

template <typename T>
T take(const std::string& in, size_t& at, const std::string& path) {
  if (at + sizeof(T) > in.size()) throw IoError("weights: truncated file: " + path);
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(uint8_t(in[at + i])) << (8 * i);
  at += sizeof(T);
  return T(v);
}

std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", (unsigned long long)v);
  return buf;
}

}  // namespace

void write_weights(const std::string& path, const WeightsFile& weights) {
  std::string out;
  out.append(kMagic, 4);
  put<uint32_t>(out, weights.version);
  put<uint32_t>(out, uint32_t(weights.tensors.size()));
  put<uint64_t>(out, weights.fingerprint);
  for (const auto& t : weights.tensors) {
    if (t.name.size() > 0xFFFF) throw IoError("weights: tensor name too long");
    put<uint16_t>(out, uint16_t(t.name.size()));
    out.append(t.name);
    if (t.dims.size() > 0xFF) throw IoError("weights: too many dimensions");
    out.push_back(char(uint8_t(t.dims.size())));
    uint64_t numel = 1;
    for (uint32_t d : t.dims) {
      put<uint32_t>(out, d);
      numel *= d;
    }
    if (numel != t.values.size()) throw IoError("weights: dims do not match value count");
    for (float v : t.values) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put<uint32_t>(out, bits);
    }
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("weights: cannot open for writing: " + path);
  if (std::fwrite(out.data(), 1, out.size(), f.get()) != out.size()) {
    throw IoError("weights: short write: " + path);
  }
}

WeightsFile read_weights(const std::string& path, std::optional<uint64_t> expect_fingerprint) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("weights: cannot open: " + path);
  std::string in;
  char buf[65536];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f.get())) > 0) in.append(buf, n);

  size_t at = 0;
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0) {
    throw IoError("weights: bad magic: " + path);
  }
  at = 4;
  WeightsFile out;
  out.version = take<uint32_t>(in, at, path);
  if (out.version != 1) {
    throw IoError("weights: unsupported version " + std::to_string(out.version) + ": " + path);
  }
  uint32_t count = take<uint32_t>(in, at, path);
  out.fingerprint = take<uint64_t>(in, at, path);
  if (expect_fingerprint && *expect_fingerprint != out.fingerprint) {
    throw IoError("weights: architecture fingerprint mismatch: expected " +
                  hex64(*expect_fingerprint) + ", found " + hex64(out.fingerprint) + ": " + path);
  }
  out.tensors.resize(count);
  for (auto& t : out.tensors) {
    uint16_t name_len = take<uint16_t>(in, at, path);
    if (at + name_len > in.size()) throw IoError("weights: truncated file: " + path);
    t.name.assign(in, at, name_len);
    at += name_len;
    uint8_t ndim = take<uint8_t>(in, at, path);
    uint64_t numel = 1;
    t.dims.resize(ndim);
    for (auto& d : t.dims) {
      d = take<uint32_t>(in, at, path);
      numel *= d;
    }
    if (numel > (1ull << 32)) throw IoError("weights: implausible tensor size: " + path);
    t.values.resize(numel);
    for (auto& v : t.values) {
      uint32_t bits = take<uint32_t>(in, at, path);
      std::memcpy(&v, &bits, 4);
    }
  }
  if (at != in.size()) throw IoError("weights: trailing bytes after the last tensor: " + path);
  return out;
}

}  // namespace speckle::io
