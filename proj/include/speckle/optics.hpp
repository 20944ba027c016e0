#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "speckle/image.hpp"

namespace speckle::optics {

struct NoiseParams {
  double read_noise_dn = 1.0;       // Gaussian read noise, digital numbers
  bool shot_noise = true;           // Poisson photon noise
  double full_scale_photons = 5000; // photon count mapped to full DN scale
  double exposure_fill = 0.25;      // mean of the frame as a fraction of full scale
};

struct OpticalParams {
  int grid_n = 512;        // simulation field samples per side, power of two
  double pitch_m = 10e-6;  // sample pitch at the sensor plane
  int sensor_w_px = 256;
  int sensor_h_px = 256;
  NoiseParams noise;
  int bit_depth = 8;  // 8 or 16

  int maxval() const { return (1 << bit_depth) - 1; }
  double field_extent_m() const { return grid_n * pitch_m; }
  void validate() const;  // throws ConfigError on violated invariants
};

// Two close laser lines: the dominant wavelength and the offset of the
// secondary one. The secondary line's relative power is configurable since
// the real split is hardware dependent.
struct LaserSpec {
  double lambda0_m = 532e-9;
  double delta_lambda_m = 1.8e-9;
  std::array<double, 3> source_pos_m{0.0, 0.0, 0.0};
  double power_ratio = 1.0;

  double lambda1_m() const { return lambda0_m - delta_lambda_m; }
  void validate() const;
};

// Coded aperture on the marker: a circular pupil crossed by parallel opaque
// bars running along x at zero in-plane rotation. There is a fundamental
// trade here: deep bar modulation makes a strong oriented signature in the
// frame spectrum, but by Fourier duality it also puts autocorrelation bumps
// at the bar spacings, which the side-peak detector would mistake for a
// wavelength shift at small tilts. Two presets cover the two uses:
//   - default: four thin bars at irregular offsets (distinct pairwise
//     spacings spread the autocorrelation energy); bumps stay below the
//     side-peak threshold, the oriented signature is mild.
//   - strong_code(): a pseudorandom telegraph bar code at ~50% fill whose
//     along-bar autocorrelation ridge makes orientation readable to
//     sub-degree accuracy. Not for side-peak work.
struct ApertureSpec {
  double pupil_diameter_frac = 0.9;    // of the field extent; <= 0 disables the pupil
  int stripe_count = 4;
  double stripe_width_frac = 1.0 / 32; // of the field extent
  std::vector<double> stripe_offsets_frac;  // centers along y, of the field extent
  double edge_softness_px = 1.5;       // linear edge ramp half-width
  double code_feature_frac = 0.0;      // > 0 adds the telegraph bar code
  double code_fill = 0.5;              // opaque fraction of the code
  uint64_t code_seed = 2024;           // the code is marker identity, not noise

  static ApertureSpec open();               // fully transmissive mask
  static ApertureSpec strong_code();        // orientation-grade bar code
  std::vector<double> resolved_offsets() const;
};

struct Pose {
  double theta_y_deg = 0.0;  // absolute tilt about the y axis
  double theta_z_deg = 0.0;  // absolute in-plane rotation
  double d_z_m = 0.20;       // marker depth
};

// In-distribution pose ranges used by dataset generation and target
// normalization. Estimators may output values outside these.
inline constexpr double kThetaYMaxDeg = 40.0;
inline constexpr double kThetaZMaxDeg = 90.0;
inline constexpr double kDepthMinM = 0.16;
inline constexpr double kDepthMaxM = 0.28;

struct SurfaceRealization {
  Image<double> height_map;    // meters, grid_n x grid_n
  Image<double> aperture_mask; // transmission in [0, 1]
  double pitch_m = 0.0;        // physical pitch of the grid it was generated on
  uint64_t seed = 0;
};

struct FrameMeta {
  OpticalParams optics;
  LaserSpec laser;
};

struct SpeckleFrame {
  Image<uint16_t> pixels;  // quantized DN, < 2^bit_depth
  Pose pose;
  int64_t frame_index = 0;
  FrameMeta meta;
};

// Rough marker stand-in: i.i.d. Gaussian heights with the given RMS plus the
// rendered aperture mask. Identical seeds give bitwise-identical output.
SurfaceRealization generate_surface(uint64_t seed, const OpticalParams& params,
                                    double roughness_rms_m, const ApertureSpec& aperture);

// Bilinear in-plane rotation about the grid center; samples outside the
// source grid read as zero. Exact at multiples of 90 degrees.
Image<double> rotate_in_plane(const Image<double>& img, double angle_deg);

// Complex reflectance leaving the marker for one wavelength:
//   A_rot * exp(i * 4*pi/lambda * (h_rot + sin(theta_y) * x))
// The 4*pi factors encode the double pass off the reflective surface; the
// x ramp encodes that a surface tilt of theta_y steers the return by
// 2*theta_y.
ComplexField reflected_field(const SurfaceRealization& surface, const Pose& pose,
                             double lambda_m);

// Exact angular-spectrum transfer applied in the Fourier domain. Without the
// band limit the transfer is unitary over propagating frequencies; with it,
// frequencies outside the Matsushima window for |distance| are zeroed.
// Negative distance back-propagates.
ComplexField propagate_angular_spectrum(const ComplexField& field, double distance_m,
                                        double lambda_m, double pitch_m,
                                        bool band_limit = true);

// Noiseless incoherent sum over the two laser lines, center-cropped to the
// sensor, before exposure normalization and quantization.
Image<double> render_intensity(const SurfaceRealization& surface, const Pose& pose,
                               const LaserSpec& laser, const OpticalParams& params);

// Full sensor model: render_intensity, exposure normalization to the
// configured fill, optional shot + read noise, quantization to bit_depth.
SpeckleFrame render_speckle_frame(const SurfaceRealization& surface, const Pose& pose,
                                  const LaserSpec& laser, const OpticalParams& params,
                                  uint64_t noise_seed);

}  // namespace speckle::optics
