#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "speckle/optics.hpp"

namespace speckle::scene {

// Inclusive sweep range; step <= 0 yields the single value lo.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  std::vector<double> expand() const;  // throws ConfigError on an empty range
};

enum class MotionAxis { y, z };

// Capture sweep: a Cartesian grid of marker poses and rotation speeds. At
// each grid pose, frames_per_pose frames are captured while the marker keeps
// turning about the motion axis at the scheduled rpm, so successive frames
// advance by rpm * 6 / fps degrees. The grid pose is the pose of the middle
// frame of each stack.
struct SweepSpec {
  Range theta_y_deg{0.0, 40.0, 5.0};
  Range theta_z_deg{0.0, 0.0, 0.0};
  Range depth_m{0.20, 0.20, 0.0};
  std::vector<double> rpm{0.0};
  double fps = 30.0;
  int frames_per_pose = 5;
  MotionAxis motion_axis = MotionAxis::y;

  void validate() const;
};

struct ScheduledFrame {
  optics::Pose pose;
  int group = 0;      // grid-pose stack this frame belongs to
  int sub_index = 0;  // 0 .. frames_per_pose-1
  double rpm = 0.0;
};

struct GroupInfo {
  optics::Pose center;  // label pose of the stack (middle frame)
  double rpm = 0.0;
};

std::vector<ScheduledFrame> make_schedule(const SweepSpec& spec);
std::vector<GroupInfo> schedule_groups(const SweepSpec& spec);

struct SurfaceConfig {
  double roughness_rms_m = 2e-6;
  optics::ApertureSpec aperture;
};

struct CaptureSequence {
  std::vector<optics::SpeckleFrame> frames;  // frame_index strictly increasing
  std::vector<ScheduledFrame> schedule;      // parallel to frames
  SweepSpec sweep;
  optics::OpticalParams optics_params;
  optics::LaserSpec laser;
  SurfaceConfig surface;
  uint64_t master_seed = 0;
  uint64_t surface_seed = 0;
};

// Renders every scheduled pose. One surface realization per dataset (the
// marker is one physical object); per-frame noise streams are split from the
// master seed by frame counter. Rendering is parallel over frames; outputs
// land in preassigned slots so the result does not depend on scheduling.
CaptureSequence simulate_dataset(const SweepSpec& spec, const optics::OpticalParams& optics_params,
                                 const optics::LaserSpec& laser, const SurfaceConfig& surface,
                                 uint64_t master_seed);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Group-level split assignment (0 = train, 1 = val, 2 = test). Stacks stay
// whole. Split sizes follow floored cumulative shares of the group count
// (e.g. 63 groups at 0.8/0.1/0.1 give 50/6/7); groups are dealt round-robin
// across theta_y decile buckets, shuffled within each bucket by the seed, so
// every split spans the tilt range.
std::vector<int> assign_splits(const std::vector<GroupInfo>& groups, const SplitRatios& ratios,
                               uint64_t seed);

std::array<CaptureSequence, 3> split_dataset(const CaptureSequence& seq, const SplitRatios& ratios,
                                             uint64_t seed);

}  // namespace speckle::scene
