#include "speckle/learned/preprocess.hpp"

#include <cmath>
#include <map>

#include "speckle/dsp.hpp"
#include "speckle/parallel.hpp"

namespace speckle::learned {

InputStack preprocess_stack(std::span<const optics::SpeckleFrame> frames, int crop_w,
                            int crop_h) {
  if (frames.size() != kStackFrames) {
    throw ConfigError("preprocess: a stack is exactly five frames");
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].pixels.h() != frames[0].pixels.h() ||
        frames[i].pixels.w() != frames[0].pixels.w()) {
      throw ConfigError("preprocess: stack frames differ in size");
    }
    if (i > 0 && frames[i].frame_index != frames[i - 1].frame_index + 1) {
      throw ConfigError("preprocess: stack frames must be consecutive");
    }
  }

  InputStack stack;
  stack.crop_w = crop_w;
  stack.crop_h = crop_h;
  stack.label = frames[kStackFrames / 2].pose;
  stack.values = Tensor<float>({kStackFrames, crop_h, crop_w});
  const int64_t plane = int64_t(crop_h) * crop_w;
  for (int i = 0; i < kStackFrames; ++i) {
    auto spec = dsp::central_crop(dsp::fft_logmag(frames[i]), crop_w, crop_h);
    float* dst = stack.values.data() + i * plane;
    for (int64_t p = 0; p < plane; ++p) dst[p] = float(spec.logmag.data()[p]);
  }
  // Standardize over the whole stack (mean/variance in double for stability).
  const size_t n = stack.values.v.size();
  double mean = kernels::active().sum_f32(stack.values.data(), n) / double(n);
  double var = kernels::active().sumsq_f32(stack.values.data(), n) / double(n) - mean * mean;
  const float inv = var > 0.0 ? float(1.0 / std::sqrt(var)) : 1.0f;
  kernels::active().scale_bias_f32(stack.values.data(), inv, float(-mean * inv), n);
  return stack;
}

std::vector<InputStack> stacks_from_sequence(const scene::CaptureSequence& seq, int crop_w,
                                             int crop_h) {
  // Group frames by capture stack, keeping schedule order.
  std::map<int, std::vector<const optics::SpeckleFrame*>> groups;
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    groups[seq.schedule[i].group].push_back(&seq.frames[i]);
  }
  struct Window {
    std::array<const optics::SpeckleFrame*, kStackFrames> frames;
  };
  std::vector<Window> windows;
  for (const auto& [group, frames] : groups) {
    for (size_t start = 0; start + kStackFrames <= frames.size(); ++start) {
      Window w;
      for (int k = 0; k < kStackFrames; ++k) w.frames[size_t(k)] = frames[start + k];
      windows.push_back(w);
    }
  }
  std::vector<InputStack> out(windows.size());
  parallel_for(int64_t(windows.size()), 8, [&](int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) {
      std::array<optics::SpeckleFrame, kStackFrames> copy;
      for (int k = 0; k < kStackFrames; ++k) copy[size_t(k)] = *windows[size_t(i)].frames[size_t(k)];
      out[size_t(i)] = preprocess_stack(std::span<const optics::SpeckleFrame>(copy), crop_w, crop_h);
    }
  });
  return out;
}

}  // namespace speckle::learned
