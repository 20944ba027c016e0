#include "speckle/learned/infer.hpp"

#include <chrono>
#include <cmath>

#include "speckle/dsp.hpp"

namespace speckle::learned {

StreamEstimator::StreamEstimator(LoadedModel model) : model_(std::move(model)) {}

void StreamEstimator::reset() {
  window_.clear();
  stats_ = Stats{};
}

std::optional<optics::Pose> StreamEstimator::push(const optics::SpeckleFrame& frame) {
  const auto t0 = std::chrono::steady_clock::now();

  auto spec = dsp::central_crop(dsp::fft_logmag(frame), model_.crop_w, model_.crop_h);
  Tensor<float> plane({model_.crop_h, model_.crop_w});
  for (size_t i = 0; i < plane.v.size(); ++i) plane.v[i] = float(spec.logmag.data()[i]);
  window_.push_back(std::move(plane));
  if (window_.size() > kStackFrames) window_.pop_front();

  std::optional<optics::Pose> estimate;
  if (window_.size() == kStackFrames) {
    const int64_t per_plane = int64_t(model_.crop_h) * model_.crop_w;
    Tensor<float> x({1, kStackFrames, model_.crop_h, model_.crop_w});
    for (int k = 0; k < kStackFrames; ++k) {
      std::copy(window_[size_t(k)].v.begin(), window_[size_t(k)].v.end(),
                x.v.begin() + k * per_plane);
    }
    const size_t n = x.v.size();
    double mean = kernels::active().sum_f32(x.data(), n) / double(n);
    double var = kernels::active().sumsq_f32(x.data(), n) / double(n) - mean * mean;
    const float inv = var > 0.0 ? float(1.0 / std::sqrt(var)) : 1.0f;
    kernels::active().scale_bias_f32(x.data(), inv, float(-mean * inv), n);

    Tensor<float> out = model_.net.forward_infer(x);
    optics::Pose pose;
    pose.theta_y_deg = double(out.v[0]) * model_.norm_scale[0] + model_.norm_offset[0];
    pose.theta_z_deg = double(out.v[1]) * model_.norm_scale[1] + model_.norm_offset[1];
    pose.d_z_m = double(out.v[2]) * model_.norm_scale[2] + model_.norm_offset[2];
    estimate = pose;
    stats_.estimates += 1;
  }
  stats_.frames += 1;
  stats_.total_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return estimate;
}

}  // namespace speckle::learned
