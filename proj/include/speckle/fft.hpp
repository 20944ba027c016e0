#pragma once

#include "speckle/image.hpp"

namespace speckle::fft {

// In-place 2-D complex DFT backed by FFTW (double precision, FFTW_ESTIMATE
// plans so planning is deterministic). Forward is unnormalized; inverse
// divides by h*w. Plan creation is mutex-guarded; execution is reentrant,
// so fields may be transformed from multiple threads.
void transform_2d(ComplexField& field, bool inverse);

// Cyclic roll by (h/2, w/2): moves the zero bin to the center for even dims.
template <typename T>
Image<T> shift_to_center(const Image<T>& in) {
  Image<T> out(in.h(), in.w());
  int sy = in.h() / 2, sx = in.w() / 2;
  for (int y = 0; y < in.h(); ++y) {
    int yy = (y + sy) % in.h();
    for (int x = 0; x < in.w(); ++x) out.at(yy, (x + sx) % in.w()) = in.at(y, x);
  }
  return out;
}

// Unshifted FFT bin frequency in cycles per sample unit, bin k of n samples
// spaced `pitch` apart.
inline double bin_freq(int k, int n, double pitch) {
  int s = (k <= n / 2) ? k : k - n;
  return double(s) / (double(n) * pitch);
}

}  // namespace speckle::fft
