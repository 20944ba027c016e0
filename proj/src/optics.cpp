#include "speckle/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "speckle/common.hpp"
#include "speckle/fft.hpp"
#include "speckle/kernels.hpp"
#include "speckle/rng.hpp"

namespace speckle::optics {
namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Matsushima band limit for the angular-spectrum method, per axis, in
// cycles per meter.
double band_limit_freq(double distance_m, double lambda_m, double extent_m) {
  double ratio = 2.0 * std::abs(distance_m) / extent_m;
  return 1.0 / (lambda_m * std::sqrt(ratio * ratio + 1.0));
}

// Marker-plane field for one line given already-rotated height and mask.
// inv_lambda_ref = 0 gives the plain reflected field; a nonzero value
// references the tilt ramp against a carrier at that wavelength. The tilt
// ramp stays in lab coordinates because the y rotation axis is fixed in the
// rig; x is physical, measured from the grid center.
ComplexField marker_field(const Image<double>& height, const Image<double>& mask,
                          double theta_y_deg, double lambda_m, double inv_lambda_ref,
                          double pitch_m) {
  const int n = height.h();
  const double sin_ty = std::sin(theta_y_deg * kPi / 180.0);
  const double k_height = 4.0 * kPi / lambda_m;
  const double k_step = 4.0 * kPi * sin_ty * (1.0 / lambda_m - inv_lambda_ref) * pitch_m;

  ComplexField field(n, n);
  for (int y = 0; y < n; ++y) {
    const double* hrow = height.row(y);
    const double* arow = mask.row(y);
    std::complex<double>* out = field.row(y);
    for (int x = 0; x < n; ++x) {
      out[x] = std::polar(arow[x], k_height * hrow[x] + k_step * (x - n / 2));
    }
  }
  return field;
}

}  // namespace

void OpticalParams::validate() const {
  if (!is_pow2(grid_n)) throw ConfigError("optics: grid_n must be a power of two");
  if (pitch_m <= 0.0) throw ConfigError("optics: pitch_m must be positive");
  if (sensor_w_px <= 0 || sensor_h_px <= 0) throw ConfigError("optics: sensor dims must be positive");
  if (grid_n < std::max(sensor_w_px, sensor_h_px)) {
    throw ConfigError("optics: grid_n must cover the sensor crop");
  }
  if (bit_depth != 8 && bit_depth != 16) throw ConfigError("optics: bit_depth must be 8 or 16");
  if (noise.read_noise_dn < 0.0) throw ConfigError("optics: read noise must be >= 0");
  if (noise.full_scale_photons <= 0.0) throw ConfigError("optics: full_scale_photons must be > 0");
  if (noise.exposure_fill <= 0.0 || noise.exposure_fill > 1.0) {
    throw ConfigError("optics: exposure_fill must be in (0, 1]");
  }
}

void LaserSpec::validate() const {
  if (lambda0_m <= 0.0) throw ConfigError("laser: lambda0 must be positive");
  if (delta_lambda_m < 0.0) throw ConfigError("laser: delta_lambda must be >= 0");
  if (delta_lambda_m >= lambda0_m / 100.0) {
    throw ConfigError("laser: delta_lambda must be small against lambda0 (< lambda0/100)");
  }
  if (power_ratio < 0.0) throw ConfigError("laser: power_ratio must be >= 0");
}

ApertureSpec ApertureSpec::open() {
  ApertureSpec spec;
  spec.pupil_diameter_frac = 0.0;
  spec.stripe_count = 0;
  spec.stripe_width_frac = 0.0;
  spec.code_feature_frac = 0.0;
  return spec;
}

ApertureSpec ApertureSpec::strong_code() {
  ApertureSpec spec;
  spec.stripe_count = 0;
  spec.code_feature_frac = 1.0 / 32;
  spec.code_fill = 0.5;
  return spec;
}

std::vector<double> ApertureSpec::resolved_offsets() const {
  if (!stripe_offsets_frac.empty()) return stripe_offsets_frac;
  // Irregular spacings with distinct pairwise differences.
  static constexpr double kDefault[] = {-0.32, -0.10, 0.07, 0.33, -0.22, 0.19, -0.02, 0.27};
  std::vector<double> out;
  out.reserve(stripe_count);
  for (int i = 0; i < stripe_count; ++i) {
    if (i < int(std::size(kDefault))) {
      out.push_back(kDefault[i]);
    } else {
      // Golden-ratio spread for unusually many stripes.
      double f = std::fmod((i + 1) * 0.6180339887498949, 1.0);
      out.push_back(0.7 * (f - 0.5));
    }
  }
  return out;
}

SurfaceRealization generate_surface(uint64_t seed, const OpticalParams& params,
                                    double roughness_rms_m, const ApertureSpec& aperture) {
  params.validate();
  if (roughness_rms_m < 0.0) throw ConfigError("surface: roughness must be >= 0");
  const int n = params.grid_n;
  if (aperture.stripe_count > 0) {
    if (aperture.stripe_count != int(aperture.resolved_offsets().size())) {
      throw ConfigError("surface: stripe offsets must match stripe count");
    }
    if (aperture.stripe_width_frac * n < 2.0) {
      throw ConfigError("surface: grid too small for the aperture stripe width");
    }
  }
  if (aperture.pupil_diameter_frac > 0.0 && aperture.pupil_diameter_frac * n < 16.0) {
    throw ConfigError("surface: grid too small for the pupil diameter");
  }

  SurfaceRealization out;
  out.seed = seed;
  out.pitch_m = params.pitch_m;
  out.height_map = Image<double>(n, n, 0.0);
  if (roughness_rms_m > 0.0) {
    Rng rng(derive_seed(seed, "surface.height", 0));
    double* h = out.height_map.data();
    for (size_t i = 0; i < out.height_map.size(); ++i) h[i] = roughness_rms_m * rng.next_gaussian();
  }

  // 1-D transmission profile along y: thin bars and/or the telegraph code,
  // with linear edge ramps so in-plane rotation resamples them cleanly.
  const double soft = std::max(0.0, aperture.edge_softness_px);
  std::vector<double> profile(n, 1.0);
  const double c = (n - 1) / 2.0;
  if (aperture.stripe_count > 0) {
    const double hw = aperture.stripe_width_frac * n / 2.0;
    for (double offset : aperture.resolved_offsets()) {
      const double bar_c = c + offset * n;
      for (int y = 0; y < n; ++y) {
        double edge = std::abs(y - bar_c) - hw;  // < 0 inside the bar
        double t = soft > 0.0 ? std::clamp((edge + soft) / (2.0 * soft), 0.0, 1.0)
                              : (edge < 0.0 ? 0.0 : 1.0);
        profile[y] *= t;
      }
    }
  }
  if (aperture.code_feature_frac > 0.0) {
    const double feature_px = aperture.code_feature_frac * n;
    if (feature_px < 3.0) throw ConfigError("surface: grid too small for the code feature size");
    std::vector<double> code(n, 1.0);
    Rng rng(derive_seed(aperture.code_seed, "aperture.code", 0));
    bool opaque = rng.next_unit() < aperture.code_fill;
    int y = 0;
    while (y < n) {
      double scale = opaque ? aperture.code_fill / 0.5 : (1.0 - aperture.code_fill) / 0.5;
      int len = std::max(2, int(std::lround(feature_px * scale * (0.6 + 0.8 * rng.next_unit()))));
      for (int i = 0; i < len && y < n; ++i, ++y) code[y] = opaque ? 0.0 : 1.0;
      opaque = !opaque;
    }
    if (soft > 0.0) {  // box blur over +-soft
      int half = std::max(1, int(std::lround(soft)));
      std::vector<double> blurred(n);
      for (int yy = 0; yy < n; ++yy) {
        double acc = 0.0;
        int cnt = 0;
        for (int d = -half; d <= half; ++d) {
          int idx = yy + d;
          if (idx < 0 || idx >= n) continue;
          acc += code[idx];
          ++cnt;
        }
        blurred[yy] = acc / cnt;
      }
      code.swap(blurred);
    }
    for (int yy = 0; yy < n; ++yy) profile[yy] *= code[yy];
  }

  out.aperture_mask = Image<double>(n, n, 1.0);
  const bool pupil = aperture.pupil_diameter_frac > 0.0;
  const double r2 = std::pow(aperture.pupil_diameter_frac * n / 2.0, 2.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double dy = y - c, dx = x - c;
      out.aperture_mask.at(y, x) =
          (pupil && dy * dy + dx * dx > r2) ? 0.0 : profile[y];
    }
  }
  return out;
}

Image<double> rotate_in_plane(const Image<double>& img, double angle_deg) {
  const int h = img.h(), w = img.w();
  Image<double> out(h, w, 0.0);
  const double a = angle_deg * kPi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  for (int y = 0; y < h; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      // Inverse map: content rotates by +angle (counterclockwise with y up,
      // i.e. toward decreasing row index).
      double sx = cx + ca * dx - sa * dy;
      double sy = cy + sa * dx + ca * dy;
      int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      if (x0 < -1 || x0 > w - 1 || y0 < -1 || y0 > h - 1) continue;
      double fx = sx - x0, fy = sy - y0;
      auto sample = [&](int yy, int xx) -> double {
        return (yy >= 0 && yy < h && xx >= 0 && xx < w) ? img.at(yy, xx) : 0.0;
      };
      out.at(y, x) = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                     fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
    }
  }
  return out;
}

ComplexField reflected_field(const SurfaceRealization& surface, const Pose& pose,
                             double lambda_m) {
  if (lambda_m <= 0.0) throw ConfigError("reflected_field: wavelength must be positive");
  if (surface.pitch_m <= 0.0) throw ConfigError("reflected_field: surface carries no pitch");
  Image<double> height_rot, mask_rot;
  const Image<double>* height = &surface.height_map;
  const Image<double>* mask = &surface.aperture_mask;
  if (std::fmod(pose.theta_z_deg, 360.0) != 0.0) {
    height_rot = rotate_in_plane(surface.height_map, pose.theta_z_deg);
    mask_rot = rotate_in_plane(surface.aperture_mask, pose.theta_z_deg);
    height = &height_rot;
    mask = &mask_rot;
  }
  return marker_field(*height, *mask, pose.theta_y_deg, lambda_m, 0.0, surface.pitch_m);
}

ComplexField propagate_angular_spectrum(const ComplexField& field, double distance_m,
                                        double lambda_m, double pitch_m, bool band_limit) {
  if (lambda_m <= 0.0 || pitch_m <= 0.0) {
    throw ConfigError("propagate: wavelength and pitch must be positive");
  }
  for (size_t i = 0; i < field.size(); ++i) {
    const auto& z = field.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConfigError("propagate: field contains non-finite values");
    }
  }

  ComplexField spec = field;
  fft::transform_2d(spec, false);

  const int h = spec.h(), w = spec.w();
  const double inv_l2 = 1.0 / (lambda_m * lambda_m);
  const double flim_y = band_limit ? band_limit_freq(distance_m, lambda_m, h * pitch_m) : 0.0;
  const double flim_x = band_limit ? band_limit_freq(distance_m, lambda_m, w * pitch_m) : 0.0;

  std::vector<std::complex<double>> hrow(w);
  for (int y = 0; y < h; ++y) {
    const double fy = fft::bin_freq(y, h, pitch_m);
    for (int x = 0; x < w; ++x) {
      const double fx = fft::bin_freq(x, w, pitch_m);
      if (band_limit && (std::abs(fx) > flim_x || std::abs(fy) > flim_y)) {
        hrow[x] = 0.0;
        continue;
      }
      const double arg = inv_l2 - fx * fx - fy * fy;
      if (arg >= 0.0) {
        hrow[x] = std::polar(1.0, 2.0 * kPi * distance_m * std::sqrt(arg));
      } else {
        // Evanescent component: decays over |distance|.
        hrow[x] = std::exp(-2.0 * kPi * std::abs(distance_m) * std::sqrt(-arg));
      }
    }
    kernels::active().cmul_f64(spec.row(y), hrow.data(), spec.row(y), size_t(w));
  }

  fft::transform_2d(spec, true);
  return spec;
}

Image<double> render_intensity(const SurfaceRealization& surface, const Pose& pose,
                               const LaserSpec& laser, const OpticalParams& params) {
  params.validate();
  laser.validate();
  if (surface.height_map.h() != params.grid_n || surface.height_map.w() != params.grid_n) {
    throw ConfigError("render: surface grid does not match optics grid");
  }
  if (surface.pitch_m != params.pitch_m) {
    throw ConfigError("render: surface was generated at a different pitch");
  }
  if (pose.d_z_m <= 0.0) throw ConfigError("render: depth must be positive");
  const double extent = params.field_extent_m();
  // Sampling guard: the band-limited window must keep a usable cone.
  if (band_limit_freq(pose.d_z_m, laser.lambda0_m, extent) * extent < 16.0) {
    throw ConfigError("render: depth outside the simulatable range for this grid");
  }

  const int n = params.grid_n;
  Image<double> height_rot, mask_rot;
  const Image<double>* height = &surface.height_map;
  const Image<double>* mask = &surface.aperture_mask;
  if (std::fmod(pose.theta_z_deg, 360.0) != 0.0) {
    height_rot = rotate_in_plane(surface.height_map, pose.theta_z_deg);
    mask_rot = rotate_in_plane(surface.aperture_mask, pose.theta_z_deg);
    height = &height_rot;
    mask = &mask_rot;
  }

  // The co-axial retroreflective layout keeps the dominant line's specular
  // return on the sensor for every tilt, so each line's field is referenced
  // against that return carrier before propagation; only the dispersive
  // residual ramp (zero for lambda0) survives. The resulting copy shift at
  // the sensor is 2 * d_z * sin(theta_y) * delta_lambda / lambda0.
  const double inv_ref = 1.0 / laser.lambda0_m;
  Image<double> intensity(n, n, 0.0);
  const double weights[2] = {1.0, laser.power_ratio};
  const double lambdas[2] = {laser.lambda0_m, laser.lambda1_m()};
  for (int line = 0; line < 2; ++line) {
    if (weights[line] <= 0.0) continue;
    ComplexField field = marker_field(*height, *mask, pose.theta_y_deg, lambdas[line],
                                      inv_ref, params.pitch_m);
    ComplexField at_sensor = propagate_angular_spectrum(field, pose.d_z_m, lambdas[line],
                                                        params.pitch_m, /*band_limit=*/true);
    kernels::active().abs2_accum_f64(at_sensor.data(), weights[line], intensity.data(),
                                     intensity.size());
  }

  Image<double> crop(params.sensor_h_px, params.sensor_w_px);
  const int y0 = n / 2 - params.sensor_h_px / 2;
  const int x0 = n / 2 - params.sensor_w_px / 2;
  for (int y = 0; y < params.sensor_h_px; ++y) {
    for (int x = 0; x < params.sensor_w_px; ++x) crop.at(y, x) = intensity.at(y0 + y, x0 + x);
  }
  return crop;
}

SpeckleFrame render_speckle_frame(const SurfaceRealization& surface, const Pose& pose,
                                  const LaserSpec& laser, const OpticalParams& params,
                                  uint64_t noise_seed) {
  Image<double> intensity = render_intensity(surface, pose, laser, params);
  const double mean =
      kernels::active().sum_f64(intensity.data(), intensity.size()) / double(intensity.size());
  if (!(mean > 0.0)) throw ConfigError("render: frame carries no light (opaque aperture?)");

  const double maxval = params.maxval();
  const double scale = params.noise.exposure_fill * maxval / mean;
  const double flux = params.noise.full_scale_photons;
  Rng rng(derive_seed(noise_seed, "frame.noise", 0));

  SpeckleFrame frame;
  frame.pixels = Image<uint16_t>(params.sensor_h_px, params.sensor_w_px);
  frame.pose = pose;
  frame.meta = FrameMeta{params, laser};
  for (int y = 0; y < params.sensor_h_px; ++y) {
    for (int x = 0; x < params.sensor_w_px; ++x) {
      double dn = intensity.at(y, x) * scale;
      if (params.noise.shot_noise) {
        double photons_mean = dn / maxval * flux;
        dn = double(rng.next_poisson(photons_mean)) * (maxval / flux);
      }
      if (params.noise.read_noise_dn > 0.0) {
        dn += params.noise.read_noise_dn * rng.next_gaussian();
      }
      long q = std::lround(dn);
      frame.pixels.at(y, x) = uint16_t(std::clamp(q, 0L, long(maxval)));
    }
  }
  return frame;
}

}  // namespace speckle::optics
