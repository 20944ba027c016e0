#pragma once

#include <cassert>
#include <complex>
#include <cstdint>
#include <vector>

namespace speckle {

// Dense row-major 2-D array. Value semantics throughout; hot loops go
// through data() so the kernel layer can vectorize.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int h, int w, T fill = T{}) : h_(h), w_(w), data_(size_t(h) * w, fill) {
    assert(h >= 0 && w >= 0);
  }

  int h() const { return h_; }
  int w() const { return w_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int y, int x) {
    assert(y >= 0 && y < h_ && x >= 0 && x < w_);
    return data_[size_t(y) * w_ + x];
  }
  const T& at(int y, int x) const {
    assert(y >= 0 && y < h_ && x >= 0 && x < w_);
    return data_[size_t(y) * w_ + x];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* row(int y) { return data_.data() + size_t(y) * w_; }
  const T* row(int y) const { return data_.data() + size_t(y) * w_; }

  bool operator==(const Image&) const = default;

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<T> data_;
};

using ComplexField = Image<std::complex<double>>;

}  // namespace speckle
