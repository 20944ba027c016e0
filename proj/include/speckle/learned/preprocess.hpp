#pragma once

#include <array>
#include <span>
#include <vector>

#include "speckle/learned/network.hpp"
#include "speckle/optics.hpp"
#include "speckle/scene.hpp"

namespace speckle::learned {

// Five consecutive cropped log-magnitude spectra, standardized over the
// whole stack, labeled with the middle frame's pose. The reported shape
// tuple follows the (channels, width, height) convention, so the paper-scale
// stack reads (5, 320, 180).
struct InputStack {
  Tensor<float> values;  // [5, crop_h, crop_w] in memory
  optics::Pose label;
  int crop_w = 0;
  int crop_h = 0;

  std::array<int, 3> shape_tuple() const { return {int(values.shape[0]), crop_w, crop_h}; }
};

inline constexpr int kStackFrames = 5;

// fft_logmag -> central_crop(crop_w x crop_h) per frame, stacked in time
// order, standardized to zero mean / unit variance over the stack. Frames
// must be consecutive (frame_index) and equally sized.
InputStack preprocess_stack(std::span<const optics::SpeckleFrame> frames, int crop_w, int crop_h);

// All sliding 5-frame windows within each capture group of the sequence.
std::vector<InputStack> stacks_from_sequence(const scene::CaptureSequence& seq, int crop_w,
                                             int crop_h);

}  // namespace speckle::learned
