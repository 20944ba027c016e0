#pragma once

#include "speckle/image.hpp"
#include "speckle/optics.hpp"

namespace speckle::dsp {

// Zero-frequency-centered log-magnitude spectrum of a frame.
struct Spectrum {
  Image<double> logmag;
  int source_h = 0;
  int source_w = 0;
};

// Circular autocorrelation, zero lag at the center bin, normalized so the
// zero-lag value is 1.
struct Autocorrelogram {
  Image<double> ac;
};

// Sub-pixel location of the positive-half-plane side peak. The mirrored
// peak sits at -(du, dv) by symmetry.
struct PeakPair {
  double du = 0.0;  // column offset of the peak, pixels
  double dv = 0.0;  // row offset, pixels
  double prominence = 0.0;
  bool valid = false;
};

struct StripeOrientation {
  double angle_deg = 0.0;  // image-domain stripe direction, [0, 180)
  double anisotropy = 0.0; // z-score of the angular-profile peak
  bool valid = false;
};

// Mean removal, 2-D FFT, magnitude, log1p, zero frequency centered.
Spectrum fft_logmag(const Image<double>& frame);
Spectrum fft_logmag(const optics::SpeckleFrame& frame);

// Centered crop keeping the zero-frequency bin at the new center index.
Spectrum central_crop(const Spectrum& spec, int w, int h);

// Wiener-Khinchin route: IFFT of the power spectrum of the mean-removed
// frame. Throws on zero-variance input.
Autocorrelogram autocorrelation(const Image<double>& frame);
Autocorrelogram autocorrelation(const optics::SpeckleFrame& frame);

// Masks a disk of exclusion_radius_px around zero lag, takes the global
// maximum over the half plane (v > 0, or v = 0 and u > 0), refines it with
// 3-point parabola fits along each axis. Valid iff the peak's prominence
// over the local background clears the threshold; an invalid result signals
// a tilt below the resolvable limit.
PeakPair find_side_peaks(const Autocorrelogram& ac, int exclusion_radius_px,
                         double prominence_threshold = 0.05);

// Angular energy profile of the spectrum sampled on rays (0.1 degree steps
// by default), peak refined by a parabola fit. Returns the image-domain
// stripe direction modulo 180 degrees (a vertical-stripe image reads 90).
// Isotropic spectra come back flagged invalid.
StripeOrientation stripe_orientation(const Spectrum& spec, int exclusion_radius_px,
                                     double step_deg = 0.1);

}  // namespace speckle::dsp
