#pragma once

#include <array>
#include <span>
#include <vector>

#include "speckle/dsp.hpp"
#include "speckle/optics.hpp"

namespace speckle::analytical {

// The unknowns of the closed-form tilt model plus the spectral reference
// orientation for in-plane estimates. The simulator illuminates the marker
// collimated and demodulates against the dominant line's return, so the
// dispersive copy shift accumulates over the single return path:
// d_eff = d_z - S_z. Only delta_lambda/lambda0 is identified by calibration
// (the forward model is invariant under scaling both); lambda0 itself is
// configuration.
struct CalibrationParams {
  double lambda0_m = 532e-9;
  double delta_lambda_m = 1.8e-9;
  std::array<double, 3> source_pos_m{0.0, 0.0, 0.0};
  double pitch_m = 10e-6;
  double residual_a1 = 0.0;  // px per degree; residual fixed at zero origin
  double residual_a2 = 0.0;  // px per degree^2
  double reference_orientation_deg = 90.0;  // spectral stripe angle at theta_z = 0

  double ratio() const { return delta_lambda_m / lambda0_m; }
  double effective_path_m(double depth_m) const { return depth_m - source_pos_m[2]; }
  void validate() const;
};

// Copy separation in pixels for a given tilt and depth:
//   2 * d_eff * sin(theta_y) * (dl/l0) / pitch + a1*theta + a2*theta^2.
double forward_shift_model(double theta_y_deg, double depth_m, const CalibrationParams& calib);

// Inverts the forward model on the measured |offset| by bisection over
// [0, 60] degrees. Requires a valid peak pair; throws ConvergenceError when
// the shift exceeds the model range.
double estimate_theta_y(const dsp::PeakPair& peaks, double depth_m,
                        const CalibrationParams& calib);

struct ZEstimate {
  double theta_z_deg = 0.0;
  bool valid = false;
};

// (stripe orientation - reference) folded into [0, 90]; invalid when the
// spectrum shows no usable anisotropy.
ZEstimate estimate_theta_z(const dsp::Spectrum& spec, double reference_orientation_deg,
                           int exclusion_radius_px = 8);

struct OptimizerOpts {
  int max_iters = 2000;
  double init_step = 0.25;     // in scaled-parameter units
  double tol_rel = 1e-8;       // relative loss-change stop
  int max_backoff = 48;        // step halvings before giving up
  int exclusion_radius_px = 8;
  double peak_threshold = 0.05;
};

struct CalibrationResult {
  CalibrationParams params;
  double final_loss = 0.0;     // sum of squared shift residuals, px^2
  int iterations = 0;
  int observations = 0;
  std::vector<double> loss_trace;
};

// Gradient-descent fit of (ratio, source z offset, residual polynomial) to
// the measured side-peak shifts of a labeled training set, with
// central-difference gradients, parameter scaling and backtracking halving.
// Frames whose side peak is unresolvable are dropped. Also recalibrates the
// reference orientation from frames with a valid stripe reading.
CalibrationResult calibrate(std::span<const optics::SpeckleFrame> training,
                            const CalibrationParams& init, const OptimizerOpts& opts = {});

// Exposed for the optimizer's own verification: central-difference gradient
// of the calibration loss at p (scaled parameter space).
struct ShiftObservation {
  double theta_y_deg;
  double depth_m;
  double shift_px;
};
double calibration_loss(const std::array<double, 4>& scaled, const std::array<double, 4>& scale,
                        const CalibrationParams& base, std::span<const ShiftObservation> obs);
std::array<double, 4> calibration_gradient(const std::array<double, 4>& scaled,
                                           const std::array<double, 4>& scale,
                                           const CalibrationParams& base,
                                           std::span<const ShiftObservation> obs, double step);

}  // namespace speckle::analytical
