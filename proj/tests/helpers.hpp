#pragma once

#include <cmath>
#include <cstdint>

#include "speckle/image.hpp"
#include "speckle/optics.hpp"
#include "speckle/rng.hpp"

namespace speckle::test {

// Desk-scale rig used across tests: wide enough line spacing that side peaks
// clear the exclusion disk from 5 degrees up at mid depths.
inline optics::OpticalParams desk_optics(bool noiseless = true) {
  optics::OpticalParams p;
  p.grid_n = 512;
  p.pitch_m = 10e-6;
  p.sensor_w_px = 256;
  p.sensor_h_px = 256;
  p.bit_depth = 8;
  if (noiseless) {
    p.noise.shot_noise = false;
    p.noise.read_noise_dn = 0.0;
  }
  return p;
}

inline optics::LaserSpec desk_laser() {
  optics::LaserSpec l;
  l.lambda0_m = 532e-9;
  l.delta_lambda_m = 1.8e-9;
  return l;
}

// Brute-force circular spatial autocorrelation of the mean-removed frame,
// normalized at zero lag and shifted so zero lag sits at (h/2, w/2).
// O(N^4); the independent oracle for the Wiener-Khinchin route.
inline Image<double> brute_force_autocorrelation(const Image<double>& frame) {
  const int h = frame.h(), w = frame.w();
  double mean = 0.0;
  for (size_t i = 0; i < frame.size(); ++i) mean += frame.data()[i];
  mean /= double(frame.size());

  Image<double> centered(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) centered.at(y, x) = frame.at(y, x) - mean;
  }
  Image<double> ac(h, w, 0.0);
  for (int dy = 0; dy < h; ++dy) {
    for (int dx = 0; dx < w; ++dx) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          acc += centered.at(y, x) * centered.at((y + dy) % h, (x + dx) % w);
        }
      }
      ac.at((dy + h / 2) % h, (dx + w / 2) % w) = acc;
    }
  }
  const double zero_lag = ac.at(h / 2, w / 2);
  for (size_t i = 0; i < ac.size(); ++i) ac.data()[i] /= zero_lag;
  return ac;
}

// Speckle-like random frame with roughly unit-pixel grain (uniform noise
// box-blurred once).
inline Image<double> random_speckle_image(int h, int w, uint64_t seed) {
  Rng rng(seed);
  Image<double> noise(h, w);
  for (size_t i = 0; i < noise.size(); ++i) noise.data()[i] = rng.next_unit();
  Image<double> out(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          acc += noise.at((y + dy + h) % h, (x + dx + w) % w);
        }
      }
      out.at(y, x) = acc / 9.0;
    }
  }
  return out;
}

inline Image<double> circular_shift(const Image<double>& in, int dy, int dx) {
  Image<double> out(in.h(), in.w());
  for (int y = 0; y < in.h(); ++y) {
    for (int x = 0; x < in.w(); ++x) {
      out.at((y + dy + in.h()) % in.h(), (x + dx + in.w()) % in.w()) = in.at(y, x);
    }
  }
  return out;
}

}  // namespace speckle::test
