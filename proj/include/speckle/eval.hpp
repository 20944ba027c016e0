#pragma once

#include <span>
#include <string>
#include <vector>

#include "speckle/learned/infer.hpp"
#include "speckle/optics.hpp"

namespace speckle::eval {

struct TargetMetric {
  double mae = 0.0;
  double std_dev = 0.0;  // population std of the absolute errors
  int count = 0;
};

struct MetricsReport {
  std::string method;  // "learned" or "analytical"
  std::string split;
  TargetMetric theta_y_deg;
  TargetMetric theta_z_deg;
  TargetMetric depth_cm;  // reported in centimeters
  int count = 0;
  uint64_t dataset_hash = 0;
  uint64_t weights_fingerprint = 0;  // zero for the analytical path
  double elapsed_s = 0.0;
};

// Per-target MAE and population std of absolute errors. Order of the
// (prediction, label) pairs does not matter.
MetricsReport mae_std(std::span<const optics::Pose> predictions,
                      std::span<const optics::Pose> labels);

std::string report_to_json(const MetricsReport& report);

// Side-by-side accuracy table: published hardware figures next to this
// run's synthetic ones. Refuses to mix reports from different datasets or
// splits.
std::string comparison_table(const MetricsReport& analytical, const MetricsReport& learned);

// Median frames-per-second over `runs` passes of n_frames sliding-window
// estimates (preprocessing included). Frames cycle if fewer are provided.
double bench_throughput(const learned::LoadedModel& model,
                        std::span<const optics::SpeckleFrame> frames, int n_frames,
                        int runs = 5);

}  // namespace speckle::eval
