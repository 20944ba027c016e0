#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "speckle/common.hpp"
#include "speckle/dsp.hpp"
#include "speckle/optics.hpp"

using namespace speckle;
using test::desk_laser;
using test::desk_optics;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("fft_logmag: constant frame maps to an all-zero spectrum") {
  Image<double> frame(32, 32, 7.0);
  auto spec = dsp::fft_logmag(frame);
  for (size_t i = 0; i < spec.logmag.size(); ++i) CHECK(spec.logmag.data()[i] == 0.0);
}

TEST_CASE("fft_logmag: pure cosine shows two symmetric maxima at its frequency") {
  const int n = 256;
  Image<double> frame(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) frame.at(y, x) = std::cos(2.0 * kPi * x / 8.0);
  }
  auto spec = dsp::fft_logmag(frame);
  // Period 8 px -> bins at center +- n/8.
  int cx = n / 2, cy = n / 2;
  double peak = spec.logmag.at(cy, cx + n / 8);
  CHECK(peak == doctest::Approx(spec.logmag.at(cy, cx - n / 8)).epsilon(1e-9));
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if ((y == cy && std::abs(x - cx) == n / 8)) continue;
      CHECK(spec.logmag.at(y, x) < peak - 1.0);
    }
  }
}

TEST_CASE("fft_logmag: symmetric for real input and translation invariant") {
  auto img = test::random_speckle_image(64, 64, 3);
  auto spec = dsp::fft_logmag(img);
  const int n = 64;
  for (int y = 1; y < n; ++y) {
    for (int x = 1; x < n; ++x) {
      CHECK(spec.logmag.at(y, x) ==
            doctest::Approx(spec.logmag.at(n - y, n - x)).epsilon(1e-9));
    }
  }
  auto shifted_spec = dsp::fft_logmag(test::circular_shift(img, 9, -5));
  double max_diff = 0.0;
  for (size_t i = 0; i < spec.logmag.size(); ++i) {
    max_diff = std::max(max_diff,
                        std::abs(spec.logmag.data()[i] - shifted_spec.logmag.data()[i]));
  }
  CHECK(max_diff < 1e-9);
}

TEST_CASE("central_crop keeps the zero bin centered; full crop is the identity") {
  Image<double> frame(360, 640);
  for (int y = 0; y < 360; ++y) {
    for (int x = 0; x < 640; ++x) frame.at(y, x) = std::cos(0.13 * x) + std::sin(0.07 * y * x);
  }
  auto spec = dsp::fft_logmag(frame);
  auto full = dsp::central_crop(spec, 640, 360);
  CHECK(full.logmag == spec.logmag);

  auto crop = dsp::central_crop(spec, 320, 180);
  CHECK(crop.logmag.w() == 320);
  CHECK(crop.logmag.h() == 180);
  CHECK(crop.logmag.at(90, 160) == spec.logmag.at(180, 320));
  CHECK_THROWS_AS(dsp::central_crop(crop, 640, 360), ConfigError);
}

TEST_CASE("autocorrelation matches the brute-force spatial oracle") {
  auto frame = test::random_speckle_image(32, 32, 17);
  auto fast = dsp::autocorrelation(frame);
  auto brute = test::brute_force_autocorrelation(frame);
  double max_err = 0.0;
  for (size_t i = 0; i < fast.ac.size(); ++i) {
    max_err = std::max(max_err, std::abs(fast.ac.data()[i] - brute.data()[i]));
  }
  // Relative to the unit zero lag.
  CHECK(max_err < 1e-6);
}

TEST_CASE("autocorrelation: symmetry, unit zero lag, zero-variance rejection") {
  auto params = desk_optics(false);
  auto surface = optics::generate_surface(21, params, 2e-6, optics::ApertureSpec{});
  auto frame =
      optics::render_speckle_frame(surface, optics::Pose{18.0, 33.0, 0.22}, desk_laser(),
                                   params, 3);
  auto ac = dsp::autocorrelation(frame).ac;
  const int h = ac.h(), w = ac.w();
  CHECK(ac.at(h / 2, w / 2) == doctest::Approx(1.0).epsilon(1e-12));
  double max_asym = 0.0;
  for (int y = 1; y < h; ++y) {
    for (int x = 1; x < w; ++x) {
      max_asym = std::max(max_asym, std::abs(ac.at(y, x) - ac.at(h - y, w - x)));
    }
  }
  CHECK(max_asym < 1e-9);
  for (size_t i = 0; i < ac.size(); ++i) CHECK(ac.data()[i] <= 1.0 + 1e-12);

  Image<double> flat(16, 16, 3.0);
  CHECK_THROWS_AS(dsp::autocorrelation(flat), ConfigError);
}

TEST_CASE("autocorrelation of white noise is close to a delta") {
  Rng rng(5);
  Image<double> frame(256, 256);
  for (size_t i = 0; i < frame.size(); ++i) frame.data()[i] = rng.next_unit();
  auto ac = dsp::autocorrelation(frame).ac;
  const int c = 128;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      if (std::abs(y - c) <= 1 && std::abs(x - c) <= 1) continue;
      CHECK(std::abs(ac.at(y, x)) < 0.1);
    }
  }
}

TEST_CASE("find_side_peaks: constructed overlap of a shifted copy") {
  auto base = test::random_speckle_image(256, 256, 23);
  auto shifted = test::circular_shift(base, 0, 6);
  Image<double> sum(256, 256);
  for (size_t i = 0; i < sum.size(); ++i) sum.data()[i] = base.data()[i] + shifted.data()[i];
  auto peaks = dsp::find_side_peaks(dsp::autocorrelation(sum), 3);
  REQUIRE(peaks.valid);
  CHECK(std::abs(peaks.du) == doctest::Approx(6.0).epsilon(0.045));
  CHECK(std::abs(peaks.dv) < 0.25);
  CHECK(peaks.prominence == doctest::Approx(0.5).epsilon(0.2));

  // Mirror symmetry of the pair, checked on the raw autocorrelogram.
  auto ac = dsp::autocorrelation(sum).ac;
  int py = 128 + int(std::lround(peaks.dv)), px = 128 + int(std::lround(peaks.du));
  int my = 128 - int(std::lround(peaks.dv)), mx = 128 - int(std::lround(peaks.du));
  CHECK(ac.at(py, px) == doctest::Approx(ac.at(my, mx)).epsilon(1e-9));
}

TEST_CASE("find_side_peaks: exact quadratic peak recovers its vertex") {
  const int n = 64;
  const double u0 = 9.25, v0 = 4.5;  // relative to the center bin
  Image<double> ac(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double du = (x - n / 2) - u0, dv = (y - n / 2) - v0;
      ac.at(y, x) = 1.0 - 1e-3 * (du * du + dv * dv);
    }
  }
  auto peaks = dsp::find_side_peaks(dsp::Autocorrelogram{ac}, 2, -1e9);
  REQUIRE(peaks.valid);
  CHECK(std::abs(peaks.du - u0) < 1e-12);
  CHECK(std::abs(peaks.dv - v0) < 1e-12);
}

TEST_CASE("find_side_peaks validates the exclusion radius") {
  Image<double> ac(16, 16, 0.0);
  ac.at(8, 8) = 1.0;
  CHECK_THROWS_AS(dsp::find_side_peaks(dsp::Autocorrelogram{ac}, 1), ConfigError);
}

TEST_CASE("stripe_orientation: vertical grating reads 90 degrees") {
  const int n = 256;
  // Period 8 divides the frame, so the harmonics land on exact bins.
  Image<double> img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) img.at(y, x) = (x / 4) % 2 == 0 ? 1.0 : 0.0;
  }
  auto o = dsp::stripe_orientation(dsp::fft_logmag(img), 4);
  REQUIRE(o.valid);
  CHECK(std::abs(o.angle_deg - 90.0) < 0.2);
}

TEST_CASE("stripe_orientation: rotating the image rotates the estimate") {
  const int n = 256;
  Image<double> img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(y, x) = std::cos(2.0 * kPi * x / 10.0) + 0.05 * ((x * 7 + y * 13) % 11);
    }
  }
  auto base = dsp::stripe_orientation(dsp::fft_logmag(img), 4);
  auto rotated = optics::rotate_in_plane(img, 45.0);
  auto turned = dsp::stripe_orientation(dsp::fft_logmag(rotated), 4);
  REQUIRE(base.valid);
  REQUIRE(turned.valid);
  double diff = std::fmod(turned.angle_deg - base.angle_deg + 360.0, 180.0);
  CHECK(std::abs(diff - 45.0) < 0.5);
}

TEST_CASE("stripe_orientation flags isotropic spectra invalid") {
  Rng rng(31);
  Image<double> img(256, 256);
  for (size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.next_unit();
  auto o = dsp::stripe_orientation(dsp::fft_logmag(img), 4);
  CHECK_FALSE(o.valid);
}

TEST_CASE("rendered frames: spectral stripes rotate with the marker") {
  auto params = desk_optics();
  auto laser = desk_laser();
  // Orientation-grade bar code; the closest depth has the widest spectral
  // support for the ridge.
  auto surface =
      optics::generate_surface(33, params, 2e-6, optics::ApertureSpec::strong_code());
  auto orientation_at = [&](double theta_z) {
    auto frame = optics::render_speckle_frame(
        surface, optics::Pose{0.0, theta_z, 0.16}, laser, params, 11);
    auto o = dsp::stripe_orientation(dsp::fft_logmag(frame), 8);
    REQUIRE(o.valid);
    return o.angle_deg;
  };
  double ref = orientation_at(0.0);
  double at30 = orientation_at(30.0);
  double diff = std::fmod(at30 - ref + 360.0, 180.0);
  CHECK(std::abs(diff - 30.0) < 0.5);
}
