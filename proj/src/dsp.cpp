#include "speckle/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "speckle/common.hpp"
#include "speckle/fft.hpp"
#include "speckle/kernels.hpp"

namespace speckle::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

Image<double> to_double(const Image<uint16_t>& in) {
  Image<double> out(in.h(), in.w());
  for (size_t i = 0; i < in.size(); ++i) out.data()[i] = double(in.data()[i]);
  return out;
}

double mean_of(const Image<double>& img) {
  return kernels::active().sum_f64(img.data(), img.size()) / double(img.size());
}

double median_of(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

// Vertex offset of the parabola through (-1, ym), (0, y0), (+1, yp),
// clamped to half a sample. Exact for quadratic samples.
double parabola_offset(double ym, double y0, double yp) {
  double denom = ym - 2.0 * y0 + yp;
  if (denom == 0.0) return 0.0;
  double off = 0.5 * (ym - yp) / denom;
  return std::clamp(off, -0.5, 0.5);
}

}  // namespace

Spectrum fft_logmag(const Image<double>& frame) {
  if (frame.empty()) throw ConfigError("fft_logmag: empty frame");
  const double mean = mean_of(frame);
  ComplexField field(frame.h(), frame.w());
  for (size_t i = 0; i < frame.size(); ++i) field.data()[i] = frame.data()[i] - mean;
  fft::transform_2d(field, false);
  Image<double> mag(frame.h(), frame.w());
  for (size_t i = 0; i < frame.size(); ++i) mag.data()[i] = std::log1p(std::abs(field.data()[i]));
  Spectrum out;
  out.logmag = fft::shift_to_center(mag);
  out.source_h = frame.h();
  out.source_w = frame.w();
  return out;
}

Spectrum fft_logmag(const optics::SpeckleFrame& frame) { return fft_logmag(to_double(frame.pixels)); }

Spectrum central_crop(const Spectrum& spec, int w, int h) {
  if (w <= 0 || h <= 0) throw ConfigError("central_crop: crop dims must be positive");
  if (w > spec.logmag.w() || h > spec.logmag.h()) {
    throw ConfigError("central_crop: crop larger than the spectrum");
  }
  Image<double> out(h, w);
  const int y0 = spec.logmag.h() / 2 - h / 2;
  const int x0 = spec.logmag.w() / 2 - w / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(y, x) = spec.logmag.at(y0 + y, x0 + x);
  }
  Spectrum result;
  result.logmag = std::move(out);
  result.source_h = spec.source_h;
  result.source_w = spec.source_w;
  return result;
}

Autocorrelogram autocorrelation(const Image<double>& frame) {
  if (frame.empty()) throw ConfigError("autocorrelation: empty frame");
  const double mean = mean_of(frame);
  ComplexField field(frame.h(), frame.w());
  for (size_t i = 0; i < frame.size(); ++i) field.data()[i] = frame.data()[i] - mean;
  fft::transform_2d(field, false);
  for (size_t i = 0; i < field.size(); ++i) {
    const auto& z = field.data()[i];
    field.data()[i] = z.real() * z.real() + z.imag() * z.imag();
  }
  fft::transform_2d(field, true);
  Image<double> ac(frame.h(), frame.w());
  for (size_t i = 0; i < field.size(); ++i) ac.data()[i] = field.data()[i].real();
  ac = fft::shift_to_center(ac);
  const double zero_lag = ac.at(frame.h() / 2, frame.w() / 2);
  if (!(zero_lag > 0.0)) throw ConfigError("autocorrelation: zero-variance frame");
  for (size_t i = 0; i < ac.size(); ++i) ac.data()[i] /= zero_lag;
  return Autocorrelogram{std::move(ac)};
}

Autocorrelogram autocorrelation(const optics::SpeckleFrame& frame) {
  return autocorrelation(to_double(frame.pixels));
}

PeakPair find_side_peaks(const Autocorrelogram& acg, int exclusion_radius_px,
                         double prominence_threshold) {
  if (exclusion_radius_px < 2) throw ConfigError("find_side_peaks: exclusion radius must be >= 2");
  const Image<double>& ac = acg.ac;
  const int h = ac.h(), w = ac.w();
  const int cy = h / 2, cx = w / 2;
  const double excl2 = double(exclusion_radius_px) * exclusion_radius_px;

  int best_y = -1, best_x = -1;
  double best = -1.0;
  for (int y = 1; y < h - 1; ++y) {
    const int v = y - cy;
    if (v < 0) continue;
    for (int x = 1; x < w - 1; ++x) {
      const int u = x - cx;
      if (v == 0 && u <= 0) continue;
      if (double(u) * u + double(v) * v <= excl2) continue;
      if (ac.at(y, x) > best) {
        best = ac.at(y, x);
        best_y = y;
        best_x = x;
      }
    }
  }

  PeakPair out;
  if (best_y < 0) return out;

  // Local background: median over a square ring 5..8 pixels from the peak.
  std::vector<double> ring;
  for (int dy = -8; dy <= 8; ++dy) {
    for (int dx = -8; dx <= 8; ++dx) {
      int cheb = std::max(std::abs(dy), std::abs(dx));
      if (cheb < 5) continue;
      int yy = best_y + dy, xx = best_x + dx;
      if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
      ring.push_back(ac.at(yy, xx));
    }
  }
  const double background = median_of(ring);

  out.du = (best_x - cx) +
           parabola_offset(ac.at(best_y, best_x - 1), best, ac.at(best_y, best_x + 1));
  out.dv = (best_y - cy) +
           parabola_offset(ac.at(best_y - 1, best_x), best, ac.at(best_y + 1, best_x));
  out.prominence = best - background;
  out.valid = out.prominence > prominence_threshold;
  return out;
}

StripeOrientation stripe_orientation(const Spectrum& spec, int exclusion_radius_px,
                                     double step_deg) {
  const int h = spec.logmag.h(), w = spec.logmag.w();
  const int cy = h / 2, cx = w / 2;
  const int r_max = std::min(cy, cx) - 2;
  const int r_min = std::max(exclusion_radius_px, 1) + 1;
  if (r_max <= r_min) throw ConfigError("stripe_orientation: spectrum too small");
  if (step_deg <= 0.0) throw ConfigError("stripe_orientation: step must be positive");

  // Speckled spectra carry fully developed per-bin noise; a 3x3 mean over
  // the log magnitude knocks it down without washing out the stripe lines,
  // which are several bins wide.
  Image<double> lm(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      int cnt = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          acc += spec.logmag.at(yy, xx);
          ++cnt;
        }
      }
      lm.at(y, x) = acc / cnt;
    }
  }

  // Informative annulus: the aperture signature lives where the radial mean
  // still sits above the noise floor. Depth scales the signature toward the
  // center, so the outer cut is found from the data.
  int r_cut = r_max;
  {
    std::vector<double> ring_sum(r_max + 1, 0.0);
    std::vector<int> ring_cnt(r_max + 1, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int r = int(std::lround(std::hypot(double(y - cy), double(x - cx))));
        if (r < r_min || r > r_max) continue;
        ring_sum[r] += lm.at(y, x);
        ring_cnt[r] += 1;
      }
    }
    std::vector<double> radial(r_max + 1, 0.0);
    double floor_v = 1e300, top_v = -1e300;
    for (int r = r_min; r <= r_max; ++r) {
      radial[r] = ring_cnt[r] > 0 ? ring_sum[r] / ring_cnt[r] : 0.0;
      floor_v = std::min(floor_v, radial[r]);
      top_v = std::max(top_v, radial[r]);
    }
    const double knee = floor_v + 0.10 * (top_v - floor_v);
    r_cut = r_min + 1;
    for (int r = r_max; r > r_min; --r) {
      if (radial[r] > knee) {
        r_cut = r;
        break;
      }
    }
    r_cut = std::max(r_cut, std::min(r_min + 24, r_max));
  }

  const int steps = int(std::floor(180.0 / step_deg));
  std::vector<double> profile(steps, 0.0);
  for (int s = 0; s < steps; ++s) {
    const double phi = s * step_deg * kPi / 180.0;
    const double dx = std::cos(phi), dy = -std::sin(phi);
    double acc = 0.0;
    for (int r = r_min; r <= r_cut; ++r) {
      const double x = cx + r * dx, y = cy + r * dy;
      const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
      const double fx = x - x0, fy = y - y0;
      auto at = [&](int yy, int xx) -> double {
        return (yy >= 0 && yy < h && xx >= 0 && xx < w) ? lm.at(yy, xx) : 0.0;
      };
      acc += (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
             fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
    }
    profile[s] = acc / double(r_cut - r_min + 1);
  }

  // Circular tent smoothing over +-0.7 degrees: the ridge of a stripe line
  // is a few degrees wide, adjacent-ray noise is not. A tent (not box)
  // kernel keeps the smoothed peak strictly unimodal so the parabola
  // refinement has curvature to work with.
  const int half = std::max(1, int(std::lround(0.7 / step_deg)));
  std::vector<double> smooth(steps, 0.0);
  for (int s = 0; s < steps; ++s) {
    double acc = 0.0, wsum = 0.0;
    for (int d = -half; d <= half; ++d) {
      double wgt = double(half + 1 - std::abs(d));
      acc += wgt * profile[(s + d + steps) % steps];
      wsum += wgt;
    }
    smooth[s] = acc / wsum;
  }

  int best = 0;
  for (int s = 1; s < steps; ++s) {
    if (smooth[s] > smooth[best]) best = s;
  }
  // Parabola refinement by least squares across the peak's top (+-1.2 deg):
  // adjacent rays share most of their sampled bins, so a wide fit averages
  // the correlated noise a 3-point fit would pass straight through.
  const int fit_half = std::max(1, int(std::lround(1.2 / step_deg)));
  double s_y = 0, s_xy = 0, s_xxy = 0, s_x2 = 0, s_x4 = 0, s_n = 0;
  for (int d = -fit_half; d <= fit_half; ++d) {
    const double y = smooth[(best + d + steps) % steps];
    s_y += y;
    s_xy += d * y;
    s_xxy += double(d) * d * y;
    s_x2 += double(d) * d;
    s_x4 += double(d) * d * d * d;
    s_n += 1.0;
  }
  // Fit y = a x^2 + b x + c over symmetric x; vertex at -b / 2a.
  const double a = (s_n * s_xxy - s_x2 * s_y) / (s_n * s_x4 - s_x2 * s_x2);
  const double b = s_xy / s_x2;
  double offset = (a < 0.0) ? std::clamp(-b / (2.0 * a), -double(fit_half), double(fit_half))
                            : 0.0;
  const double refined = best + offset;
  // Ray direction of maximal energy; image-domain stripes run perpendicular
  // to their spectral spread, hence the quarter-turn.
  double angle = std::fmod(refined * step_deg + 90.0, 180.0);
  if (angle < 0.0) angle += 180.0;

  const double mean = kernels::active().sum_f64(smooth.data(), smooth.size()) / steps;
  const double var =
      kernels::active().sumsq_f64(smooth.data(), smooth.size()) / steps - mean * mean;
  const double sd = std::sqrt(std::max(var, 0.0));
  StripeOrientation out;
  out.angle_deg = angle;
  out.anisotropy = sd > 0.0 ? (smooth[best] - mean) / sd : 0.0;
  out.valid = out.anisotropy >= 3.5;
  return out;
}

}  // namespace speckle::dsp
