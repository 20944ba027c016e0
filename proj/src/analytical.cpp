#include "speckle/analytical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "speckle/common.hpp"

namespace speckle::analytical {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThetaMaxDeg = 60.0;

// Model internals work on a scaled 4-vector:
//   p0 = ratio, p1 = ratio * z_offset (linearizes the depth term),
//   p2, p3 = residual polynomial coefficients.
struct ModelParams {
  double ratio;
  double ratio_z;  // ratio * source z offset
  double a1, a2;
};

double shift_of(const ModelParams& m, double pitch_m, double theta_deg, double depth_m) {
  const double s = std::sin(theta_deg * kPi / 180.0);
  return 2.0 * s * (m.ratio * depth_m - m.ratio_z) / pitch_m + m.a1 * theta_deg +
         m.a2 * theta_deg * theta_deg;
}

ModelParams unscale(const std::array<double, 4>& scaled, const std::array<double, 4>& scale) {
  return ModelParams{scaled[0] * scale[0], scaled[1] * scale[1], scaled[2] * scale[2],
                     scaled[3] * scale[3]};
}

}  // namespace

void CalibrationParams::validate() const {
  if (lambda0_m <= 0.0) throw ConfigError("calibration: lambda0 must be positive");
  if (delta_lambda_m < 0.0 || delta_lambda_m >= lambda0_m / 100.0) {
    throw ConfigError("calibration: delta_lambda outside the two-line family");
  }
  if (pitch_m <= 0.0) throw ConfigError("calibration: pitch must be positive");
}

double forward_shift_model(double theta_y_deg, double depth_m, const CalibrationParams& calib) {
  const double s = std::sin(theta_y_deg * kPi / 180.0);
  return 2.0 * calib.effective_path_m(depth_m) * s * calib.ratio() / calib.pitch_m +
         calib.residual_a1 * theta_y_deg + calib.residual_a2 * theta_y_deg * theta_y_deg;
}

double estimate_theta_y(const dsp::PeakPair& peaks, double depth_m,
                        const CalibrationParams& calib) {
  if (!peaks.valid) throw ConfigError("estimate_theta_y: peak pair is not resolvable");
  const double target = std::hypot(peaks.du, peaks.dv);
  double lo = 0.0, hi = kThetaMaxDeg;
  if (forward_shift_model(hi, depth_m, calib) < target) {
    throw ConvergenceError("estimate_theta_y: measured shift above the model range");
  }
  // The forward model is strictly increasing on [0, 60] for physical
  // parameter values, so plain bisection converges.
  while (hi - lo > 1e-9) {
    double mid = 0.5 * (lo + hi);
    if (forward_shift_model(mid, depth_m, calib) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ZEstimate estimate_theta_z(const dsp::Spectrum& spec, double reference_orientation_deg,
                           int exclusion_radius_px) {
  auto o = dsp::stripe_orientation(spec, exclusion_radius_px);
  ZEstimate out;
  out.valid = o.valid;
  double m = std::fmod(o.angle_deg - reference_orientation_deg, 180.0);
  if (m < 0.0) m += 180.0;
  // Fold into the tracked [0, 90] window; values just below 0 come back as
  // small negatives rather than 179-and-change.
  if (m > 90.0 + 45.0) m -= 180.0;
  out.theta_z_deg = m;
  return out;
}

double calibration_loss(const std::array<double, 4>& scaled, const std::array<double, 4>& scale,
                        const CalibrationParams& base, std::span<const ShiftObservation> obs) {
  ModelParams m = unscale(scaled, scale);
  double loss = 0.0;
  for (const auto& o : obs) {
    double r = shift_of(m, base.pitch_m, o.theta_y_deg, o.depth_m) - o.shift_px;
    loss += r * r;
  }
  return loss;
}

std::array<double, 4> calibration_gradient(const std::array<double, 4>& scaled,
                                           const std::array<double, 4>& scale,
                                           const CalibrationParams& base,
                                           std::span<const ShiftObservation> obs, double step) {
  std::array<double, 4> grad{};
  for (int k = 0; k < 4; ++k) {
    auto hi = scaled, lo = scaled;
    hi[k] += step;
    lo[k] -= step;
    grad[k] = (calibration_loss(hi, scale, base, obs) - calibration_loss(lo, scale, base, obs)) /
              (2.0 * step);
  }
  return grad;
}

CalibrationResult calibrate(std::span<const optics::SpeckleFrame> training,
                            const CalibrationParams& init, const OptimizerOpts& opts) {
  init.validate();

  std::vector<ShiftObservation> obs;
  double theta_min = 1e9, theta_max = -1e9;
  double orient_sin = 0.0, orient_cos = 0.0;
  int orient_count = 0;
  for (const auto& frame : training) {
    auto peaks = dsp::find_side_peaks(dsp::autocorrelation(frame), opts.exclusion_radius_px,
                                      opts.peak_threshold);
    if (peaks.valid) {
      obs.push_back(ShiftObservation{frame.pose.theta_y_deg, frame.pose.d_z_m,
                                     std::hypot(peaks.du, peaks.dv)});
      theta_min = std::min(theta_min, frame.pose.theta_y_deg);
      theta_max = std::max(theta_max, frame.pose.theta_y_deg);
    }
    auto o = dsp::stripe_orientation(dsp::fft_logmag(frame), opts.exclusion_radius_px);
    if (o.valid) {
      // 180-degree-periodic mean via the doubled angle.
      double w = (o.angle_deg - frame.pose.theta_z_deg) * kPi / 90.0;
      orient_sin += std::sin(w);
      orient_cos += std::cos(w);
      ++orient_count;
    }
  }
  if (obs.size() < 8 || theta_max - theta_min < 20.0) {
    throw ConfigError("calibrate: need >= 8 resolvable frames spanning >= 20 degrees of tilt");
  }

  // Scaled parameters start at the init values; scales put every coordinate
  // at unit order so one step size works for all of them.
  const std::array<double, 4> scale{init.ratio(), init.ratio() * 0.05, 0.05, 0.002};
  std::array<double, 4> p{1.0, init.source_pos_m[2] / 0.05, init.residual_a1 / scale[2],
                          init.residual_a2 / scale[3]};

  CalibrationResult result;
  double loss = calibration_loss(p, scale, init, obs);
  if (!std::isfinite(loss)) {
    throw ConvergenceError("calibrate: non-finite loss at the initial parameters");
  }
  result.loss_trace.push_back(loss);
  double step = opts.init_step;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    auto grad = calibration_gradient(p, scale, init, obs, 1e-6);
    double gnorm = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2] +
                             grad[3] * grad[3]);
    if (gnorm == 0.0) break;

    // Backtracking line search along -grad, halving from the running step.
    bool accepted = false;
    double trial_step = step;
    for (int back = 0; back < opts.max_backoff; ++back) {
      std::array<double, 4> cand;
      for (int k = 0; k < 4; ++k) cand[k] = p[k] - trial_step * grad[k] / gnorm;
      double cand_loss = calibration_loss(cand, scale, init, obs);
      if (!std::isfinite(cand_loss)) {
        std::ostringstream trace;
        for (double v : result.loss_trace) trace << v << "\n";
        throw ConvergenceError("calibrate: loss became non-finite during the line search",
                               trace.str());
      }
      if (cand_loss < loss) {
        double rel = (loss - cand_loss) / std::max(loss, 1e-300);
        p = cand;
        loss = cand_loss;
        result.loss_trace.push_back(loss);
        step = trial_step * 1.3;
        accepted = true;
        if (rel < opts.tol_rel) iter = opts.max_iters;  // converged
        break;
      }
      trial_step *= 0.5;
    }
    // A smooth least-squares loss always admits a decreasing step unless we
    // are at the numerical floor, so an exhausted backoff means converged.
    if (!accepted) break;
  }

  ModelParams fitted = unscale(p, scale);
  result.params = init;
  result.params.delta_lambda_m = fitted.ratio * init.lambda0_m;
  result.params.source_pos_m[2] = fitted.ratio != 0.0 ? fitted.ratio_z / fitted.ratio : 0.0;
  result.params.residual_a1 = fitted.a1;
  result.params.residual_a2 = fitted.a2;
  if (orient_count > 0) {
    double mean = std::atan2(orient_sin, orient_cos) * 90.0 / kPi;
    if (mean < 0.0) mean += 180.0;
    result.params.reference_orientation_deg = mean;
  }
  result.final_loss = loss;
  result.iterations = int(result.loss_trace.size()) - 1;
  result.observations = int(obs.size());
  return result;
}

}  // namespace speckle::analytical
