#include "speckle/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "speckle/common.hpp"
#include "speckle/parallel.hpp"
#include "speckle/rng.hpp"

namespace speckle::scene {

std::vector<double> Range::expand() const {
  if (hi < lo) throw ConfigError("sweep: empty range (hi < lo)");
  if (step < 0.0) throw ConfigError("sweep: negative step");
  std::vector<double> out;
  if (step == 0.0) {
    out.push_back(lo);
    return out;
  }
  int n = int(std::floor((hi - lo) / step + 1e-9)) + 1;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(lo + i * step);
  return out;
}

void SweepSpec::validate() const {
  auto ys = theta_y_deg.expand();
  auto zs = theta_z_deg.expand();
  auto ds = depth_m.expand();
  if (theta_y_deg.lo < 0.0 || theta_y_deg.hi > optics::kThetaYMaxDeg) {
    throw ConfigError("sweep: theta_y range outside [0, 40] degrees");
  }
  if (theta_z_deg.lo < 0.0 || theta_z_deg.hi > optics::kThetaZMaxDeg) {
    throw ConfigError("sweep: theta_z range outside [0, 90] degrees");
  }
  if (depth_m.lo < optics::kDepthMinM || depth_m.hi > optics::kDepthMaxM) {
    throw ConfigError("sweep: depth range outside [0.16, 0.28] m");
  }
  if (rpm.empty()) throw ConfigError("sweep: rpm list must not be empty");
  for (double r : rpm) {
    if (r < 0.0) throw ConfigError("sweep: rpm must be >= 0");
  }
  if (fps <= 0.0) throw ConfigError("sweep: fps must be positive");
  if (frames_per_pose < 5) throw ConfigError("sweep: frames_per_pose must be >= 5");
  (void)ys;
  (void)zs;
  (void)ds;
}

std::vector<ScheduledFrame> make_schedule(const SweepSpec& spec) {
  spec.validate();
  const auto ys = spec.theta_y_deg.expand();
  const auto zs = spec.theta_z_deg.expand();
  const auto ds = spec.depth_m.expand();
  const int mid = (spec.frames_per_pose - 1) / 2;

  std::vector<ScheduledFrame> out;
  out.reserve(ys.size() * zs.size() * ds.size() * spec.rpm.size() * spec.frames_per_pose);
  int group = 0;
  for (double y : ys) {
    for (double z : zs) {
      for (double d : ds) {
        for (double r : spec.rpm) {
          const double inc = r * 6.0 / spec.fps;  // rpm * 360 / 60 / fps
          for (int i = 0; i < spec.frames_per_pose; ++i) {
            ScheduledFrame f;
            f.pose = optics::Pose{y, z, d};
            // The stack's label is the middle frame; motion carries the
            // other frames slightly past the grid pose (no clamping, so the
            // per-frame increment stays exact).
            const double delta = (i - mid) * inc;
            if (spec.motion_axis == MotionAxis::y) {
              f.pose.theta_y_deg += delta;
            } else {
              f.pose.theta_z_deg += delta;
            }
            f.group = group;
            f.sub_index = i;
            f.rpm = r;
            out.push_back(f);
          }
          ++group;
        }
      }
    }
  }
  if (out.empty()) throw ConfigError("sweep: schedule is empty");
  return out;
}

std::vector<GroupInfo> schedule_groups(const SweepSpec& spec) {
  auto schedule = make_schedule(spec);
  const int mid = (spec.frames_per_pose - 1) / 2;
  std::vector<GroupInfo> groups;
  for (const auto& f : schedule) {
    if (f.sub_index == mid) groups.push_back(GroupInfo{f.pose, f.rpm});
  }
  return groups;
}

CaptureSequence simulate_dataset(const SweepSpec& spec, const optics::OpticalParams& optics_params,
                                 const optics::LaserSpec& laser, const SurfaceConfig& surface,
                                 uint64_t master_seed) {
  CaptureSequence seq;
  seq.schedule = make_schedule(spec);
  seq.sweep = spec;
  seq.optics_params = optics_params;
  seq.laser = laser;
  seq.surface = surface;
  seq.master_seed = master_seed;
  seq.surface_seed = derive_seed(master_seed, "dataset.surface", 0);

  auto realization = optics::generate_surface(seq.surface_seed, optics_params,
                                              surface.roughness_rms_m, surface.aperture);
  const int64_t n = int64_t(seq.schedule.size());
  seq.frames.resize(n);
  parallel_for(n, std::max<int64_t>(1, n / (4 * worker_count())), [&](int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) {
      uint64_t noise_seed = derive_seed(master_seed, "dataset.noise", uint64_t(i));
      seq.frames[i] = optics::render_speckle_frame(realization, seq.schedule[i].pose, laser,
                                                   optics_params, noise_seed);
      seq.frames[i].frame_index = i;
    }
  });
  return seq;
}

std::vector<int> assign_splits(const std::vector<GroupInfo>& groups, const SplitRatios& ratios,
                               uint64_t seed) {
  const int g = int(groups.size());
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw ConfigError("split: ratios must be non-negative");
  }
  const double total = ratios.train + ratios.val + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split: ratios must sum to 1");
  int nonzero = (ratios.train > 0) + (ratios.val > 0) + (ratios.test > 0);
  if (g < nonzero) throw ConfigError("split: fewer groups than requested splits");

  // Split sizes: floored cumulative shares keep the published worked example
  // (63 groups at 0.8/0.1/0.1 -> 50/6/7).
  const int c1 = int(std::floor(ratios.train * g));
  const int c2 = int(std::floor((ratios.train + ratios.val) * g));
  const int sizes[3] = {c1, c2 - c1, g - c2};

  // Decile buckets over theta_y rank, stable within equal angles.
  std::vector<int> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return groups[a].center.theta_y_deg < groups[b].center.theta_y_deg;
  });
  std::array<std::vector<int>, 10> buckets;
  for (int rank = 0; rank < g; ++rank) {
    int decile = std::min(9, rank * 10 / std::max(1, g));
    buckets[decile].push_back(order[rank]);
  }
  Rng rng(derive_seed(seed, "split.shuffle", 0));
  for (auto& bucket : buckets) {
    for (int i = int(bucket.size()) - 1; i > 0; --i) {
      std::swap(bucket[i], bucket[rng.next_below(uint64_t(i) + 1)]);
    }
  }
  // Deal round-robin across buckets so each contiguous span of the sequence
  // covers the tilt range.
  std::vector<int> sequence;
  sequence.reserve(g);
  std::array<size_t, 10> cursor{};
  while (int(sequence.size()) < g) {
    for (int d = 0; d < 10; ++d) {
      if (cursor[d] < buckets[d].size()) sequence.push_back(buckets[d][cursor[d]++]);
    }
  }

  std::vector<int> split_of_group(g, 0);
  int at = 0;
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < sizes[s]; ++i) split_of_group[sequence[at++]] = s;
  }
  return split_of_group;
}

std::array<CaptureSequence, 3> split_dataset(const CaptureSequence& seq, const SplitRatios& ratios,
                                             uint64_t seed) {
  std::vector<GroupInfo> groups;
  {
    const int mid = (seq.sweep.frames_per_pose - 1) / 2;
    for (size_t i = 0; i < seq.schedule.size(); ++i) {
      if (seq.schedule[i].sub_index == mid) {
        groups.push_back(GroupInfo{seq.schedule[i].pose, seq.schedule[i].rpm});
      }
    }
  }
  auto assignment = assign_splits(groups, ratios, seed);

  std::array<CaptureSequence, 3> out;
  for (auto& part : out) {
    part.sweep = seq.sweep;
    part.optics_params = seq.optics_params;
    part.laser = seq.laser;
    part.surface = seq.surface;
    part.master_seed = seq.master_seed;
    part.surface_seed = seq.surface_seed;
  }
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    int split = assignment[seq.schedule[i].group];
    out[split].frames.push_back(seq.frames[i]);
    out[split].schedule.push_back(seq.schedule[i]);
  }
  return out;
}

}  // namespace speckle::scene
