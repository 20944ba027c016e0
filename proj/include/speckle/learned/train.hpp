#pragma once

#include <array>
#include <string>
#include <vector>

#include "speckle/io.hpp"
#include "speckle/learned/network.hpp"
#include "speckle/learned/preprocess.hpp"

namespace speckle::learned {

// Loss is MSE on targets normalized to [0, 1] over the capture ranges:
// theta_y/40, theta_z/90, (d_z - 0.16)/0.12. The optimizer is Adam.
struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch = 16;
  int epochs = 50;
  uint64_t seed = 7;
  int crop_w = 128;
  int crop_h = 128;
  std::array<double, 3> norm_offset{0.0, 0.0, optics::kDepthMinM};
  std::array<double, 3> norm_scale{optics::kThetaYMaxDeg, optics::kThetaZMaxDeg,
                                   optics::kDepthMaxM - optics::kDepthMinM};

  void validate() const;
  std::array<float, 3> normalize(const optics::Pose& pose) const;
  optics::Pose denormalize(const std::array<float, 3>& y) const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Network<float> net;       // best-validation weights
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Deterministic in (seed, data, config): fixed init stream, fixed shuffle
// stream, single-threaded update order. Aborts with ConvergenceError on a
// non-finite loss.
TrainResult train(const std::vector<InputStack>& train_stacks,
                  const std::vector<InputStack>& val_stacks, const NetworkSpec& spec,
                  const TrainConfig& cfg);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

// Weights-file round trip: network state plus the normalization constants
// (norm.offset / norm.scale tensors) needed at inference time.
io::WeightsFile to_weights_file(const Network<float>& net, const TrainConfig& cfg);
struct LoadedModel {
  Network<float> net;
  std::array<double, 3> norm_offset;
  std::array<double, 3> norm_scale;
  int crop_w = 0;
  int crop_h = 0;
};
LoadedModel from_weights_file(const io::WeightsFile& file);

}  // namespace speckle::learned
