#pragma once

#include <deque>
#include <optional>

#include "speckle/learned/train.hpp"

namespace speckle::learned {

// Sliding five-frame window over a frame stream: one pose estimate per new
// frame once the window is full. Per-frame spectra are computed once and
// reused across windows; inference runs the network in eval mode, so
// estimates are deterministic and order independent.
class StreamEstimator {
 public:
  explicit StreamEstimator(LoadedModel model);

  std::optional<optics::Pose> push(const optics::SpeckleFrame& frame);
  void reset();

  struct Stats {
    int64_t frames = 0;
    int64_t estimates = 0;
    double total_seconds = 0.0;  // wall clock inside push(), preprocessing included
    double mean_latency_s() const { return frames > 0 ? total_seconds / double(frames) : 0.0; }
    double frames_per_second() const {
      return total_seconds > 0.0 ? double(frames) / total_seconds : 0.0;
    }
  };
  const Stats& stats() const { return stats_; }

 private:
  LoadedModel model_;
  std::deque<Tensor<float>> window_;  // cropped log-magnitude planes
  Stats stats_;
};

}  // namespace speckle::learned
