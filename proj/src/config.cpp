#include "speckle/config.hpp"

#include <fstream>
#include <set>

#include "speckle/common.hpp"

namespace speckle::cfg {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw ConfigError("config: " + ctx + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + ctx);
  }
}

template <typename T>
void get(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

json range_json(const scene::Range& r) { return json::array({r.lo, r.hi, r.step}); }

scene::Range range_from(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("config: " + ctx + " must be [lo, hi, step]");
  }
  return scene::Range{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json to_json(const optics::OpticalParams& v) {
  return json{{"grid_n", v.grid_n},
              {"pitch_m", v.pitch_m},
              {"sensor_w_px", v.sensor_w_px},
              {"sensor_h_px", v.sensor_h_px},
              {"bit_depth", v.bit_depth},
              {"noise",
               {{"read_noise_dn", v.noise.read_noise_dn},
                {"shot_noise", v.noise.shot_noise},
                {"full_scale_photons", v.noise.full_scale_photons},
                {"exposure_fill", v.noise.exposure_fill}}}};
}

void read_into(const json& j, optics::OpticalParams& v, const std::string& ctx) {
  check_keys(j, {"grid_n", "pitch_m", "sensor_w_px", "sensor_h_px", "bit_depth", "noise"}, ctx);
  get(j, "grid_n", v.grid_n);
  get(j, "pitch_m", v.pitch_m);
  get(j, "sensor_w_px", v.sensor_w_px);
  get(j, "sensor_h_px", v.sensor_h_px);
  get(j, "bit_depth", v.bit_depth);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    check_keys(n, {"read_noise_dn", "shot_noise", "full_scale_photons", "exposure_fill"},
               ctx + ".noise");
    get(n, "read_noise_dn", v.noise.read_noise_dn);
    get(n, "shot_noise", v.noise.shot_noise);
    get(n, "full_scale_photons", v.noise.full_scale_photons);
    get(n, "exposure_fill", v.noise.exposure_fill);
  }
}

json to_json(const optics::LaserSpec& v) {
  return json{{"lambda0_m", v.lambda0_m},
              {"delta_lambda_m", v.delta_lambda_m},
              {"source_pos_m", {v.source_pos_m[0], v.source_pos_m[1], v.source_pos_m[2]}},
              {"power_ratio", v.power_ratio}};
}

void read_into(const json& j, optics::LaserSpec& v, const std::string& ctx) {
  check_keys(j, {"lambda0_m", "delta_lambda_m", "source_pos_m", "power_ratio"}, ctx);
  get(j, "lambda0_m", v.lambda0_m);
  get(j, "delta_lambda_m", v.delta_lambda_m);
  get(j, "power_ratio", v.power_ratio);
  if (j.contains("source_pos_m")) {
    const auto& s = j.at("source_pos_m");
    if (!s.is_array() || s.size() != 3) {
      throw ConfigError("config: " + ctx + ".source_pos_m must be [x, y, z]");
    }
    for (int k = 0; k < 3; ++k) v.source_pos_m[size_t(k)] = s[size_t(k)].get<double>();
  }
}

json to_json(const optics::ApertureSpec& v) {
  return json{{"pupil_diameter_frac", v.pupil_diameter_frac},
              {"stripe_count", v.stripe_count},
              {"stripe_width_frac", v.stripe_width_frac},
              {"stripe_offsets_frac", v.stripe_offsets_frac},
              {"edge_softness_px", v.edge_softness_px},
              {"code_feature_frac", v.code_feature_frac},
              {"code_fill", v.code_fill},
              {"code_seed", v.code_seed}};
}

void read_into(const json& j, optics::ApertureSpec& v, const std::string& ctx) {
  check_keys(j,
             {"pupil_diameter_frac", "stripe_count", "stripe_width_frac", "stripe_offsets_frac",
              "edge_softness_px", "code_feature_frac", "code_fill", "code_seed"},
             ctx);
  get(j, "pupil_diameter_frac", v.pupil_diameter_frac);
  get(j, "stripe_count", v.stripe_count);
  get(j, "stripe_width_frac", v.stripe_width_frac);
  get(j, "edge_softness_px", v.edge_softness_px);
  get(j, "code_feature_frac", v.code_feature_frac);
  get(j, "code_fill", v.code_fill);
  get(j, "code_seed", v.code_seed);
  if (j.contains("stripe_offsets_frac")) {
    v.stripe_offsets_frac = j.at("stripe_offsets_frac").get<std::vector<double>>();
  }
}

json to_json(const scene::SurfaceConfig& v) {
  return json{{"roughness_rms_m", v.roughness_rms_m}, {"aperture", to_json(v.aperture)}};
}

void read_into(const json& j, scene::SurfaceConfig& v, const std::string& ctx) {
  check_keys(j, {"roughness_rms_m", "aperture"}, ctx);
  get(j, "roughness_rms_m", v.roughness_rms_m);
  if (j.contains("aperture")) read_into(j.at("aperture"), v.aperture, ctx + ".aperture");
}

json to_json(const scene::SweepSpec& v) {
  return json{{"theta_y_deg", range_json(v.theta_y_deg)},
              {"theta_z_deg", range_json(v.theta_z_deg)},
              {"depth_m", range_json(v.depth_m)},
              {"rpm", v.rpm},
              {"fps", v.fps},
              {"frames_per_pose", v.frames_per_pose},
              {"motion_axis", v.motion_axis == scene::MotionAxis::y ? "y" : "z"}};
}

void read_into(const json& j, scene::SweepSpec& v, const std::string& ctx) {
  check_keys(j,
             {"theta_y_deg", "theta_z_deg", "depth_m", "rpm", "fps", "frames_per_pose",
              "motion_axis"},
             ctx);
  if (j.contains("theta_y_deg")) v.theta_y_deg = range_from(j.at("theta_y_deg"), ctx + ".theta_y_deg");
  if (j.contains("theta_z_deg")) v.theta_z_deg = range_from(j.at("theta_z_deg"), ctx + ".theta_z_deg");
  if (j.contains("depth_m")) v.depth_m = range_from(j.at("depth_m"), ctx + ".depth_m");
  if (j.contains("rpm")) v.rpm = j.at("rpm").get<std::vector<double>>();
  get(j, "fps", v.fps);
  get(j, "frames_per_pose", v.frames_per_pose);
  if (j.contains("motion_axis")) {
    const std::string axis = j.at("motion_axis").get<std::string>();
    if (axis == "y") {
      v.motion_axis = scene::MotionAxis::y;
    } else if (axis == "z") {
      v.motion_axis = scene::MotionAxis::z;
    } else {
      throw ConfigError("config: " + ctx + ".motion_axis must be 'y' or 'z'");
    }
  }
}

json to_json(const learned::TrainConfig& v) {
  return json{{"lr", v.lr},
              {"beta1", v.beta1},
              {"beta2", v.beta2},
              {"eps", v.eps},
              {"batch", v.batch},
              {"epochs", v.epochs},
              {"seed", v.seed},
              {"crop_w", v.crop_w},
              {"crop_h", v.crop_h},
              {"norm_offset", {v.norm_offset[0], v.norm_offset[1], v.norm_offset[2]}},
              {"norm_scale", {v.norm_scale[0], v.norm_scale[1], v.norm_scale[2]}}};
}

void read_into(const json& j, learned::TrainConfig& v, const std::string& ctx) {
  check_keys(j,
             {"lr", "beta1", "beta2", "eps", "batch", "epochs", "seed", "crop_w", "crop_h",
              "norm_offset", "norm_scale"},
             ctx);
  get(j, "lr", v.lr);
  get(j, "beta1", v.beta1);
  get(j, "beta2", v.beta2);
  get(j, "eps", v.eps);
  get(j, "batch", v.batch);
  get(j, "epochs", v.epochs);
  get(j, "seed", v.seed);
  get(j, "crop_w", v.crop_w);
  get(j, "crop_h", v.crop_h);
  auto triple = [&](const char* key, std::array<double, 3>& into) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) {
      throw ConfigError("config: " + ctx + "." + key + " must have three entries");
    }
    for (int k = 0; k < 3; ++k) into[size_t(k)] = a[size_t(k)].get<double>();
  };
  triple("norm_offset", v.norm_offset);
  triple("norm_scale", v.norm_scale);
}

AppConfig desk_profile() {
  AppConfig c;
  c.scale = "desk";
  c.optics.grid_n = 512;
  c.optics.pitch_m = 10e-6;
  c.optics.sensor_w_px = 256;
  c.optics.sensor_h_px = 256;
  c.laser.lambda0_m = 532e-9;
  c.laser.delta_lambda_m = 1.8e-9;
  c.sweep.theta_y_deg = {0.0, 40.0, 5.0};
  c.sweep.theta_z_deg = {0.0, 90.0, 15.0};
  c.sweep.depth_m = {0.20, 0.20, 0.0};
  c.sweep.rpm = {3.0};
  c.train.crop_w = 128;
  c.train.crop_h = 128;
  return c;
}

AppConfig paper_profile() {
  AppConfig c;
  c.scale = "paper";
  c.optics.grid_n = 1024;
  c.optics.pitch_m = 3.45e-6;
  c.optics.sensor_w_px = 640;
  c.optics.sensor_h_px = 360;
  c.laser.lambda0_m = 532e-9;
  c.laser.delta_lambda_m = 0.2e-9;
  c.sweep.theta_y_deg = {0.0, 40.0, 1.0};
  c.sweep.theta_z_deg = {0.0, 90.0, 1.0};
  c.sweep.depth_m = {0.16, 0.28, 0.04};
  c.sweep.rpm = {3.0};
  c.train.crop_w = 320;
  c.train.crop_h = 180;
  return c;
}

AppConfig profile_for(const std::string& scale) {
  if (scale == "desk") return desk_profile();
  if (scale == "paper") return paper_profile();
  throw ConfigError("config: unknown scale '" + scale + "' (use desk or paper)");
}

AppConfig load_config(const std::string& path, const std::string& scale) {
  AppConfig config = profile_for(scale);
  if (path.empty()) return config;
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: JSON parse error in " + path + ": " + e.what());
  }
  check_keys(j, {"scale", "optics", "laser", "surface", "sweep", "split", "train"}, "config");
  if (j.contains("scale")) {
    std::string file_scale = j.at("scale").get<std::string>();
    if (file_scale != config.scale) config = profile_for(file_scale);
  }
  if (j.contains("optics")) read_into(j.at("optics"), config.optics, "optics");
  if (j.contains("laser")) read_into(j.at("laser"), config.laser, "laser");
  if (j.contains("surface")) read_into(j.at("surface"), config.surface, "surface");
  if (j.contains("sweep")) read_into(j.at("sweep"), config.sweep, "sweep");
  if (j.contains("train")) read_into(j.at("train"), config.train, "train");
  if (j.contains("split")) {
    const auto& s = j.at("split");
    check_keys(s, {"ratios", "seed"}, "split");
    if (s.contains("ratios")) {
      const auto& r = s.at("ratios");
      if (!r.is_array() || r.size() != 3) {
        throw ConfigError("config: split.ratios must be [train, val, test]");
      }
      config.split.ratios.train = r[0].get<double>();
      config.split.ratios.val = r[1].get<double>();
      config.split.ratios.test = r[2].get<double>();
    }
    if (s.contains("seed")) config.split.seed = s.at("seed").get<uint64_t>();
  }
  try {
    config.optics.validate();
    config.laser.validate();
    config.sweep.validate();
    config.train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (from " + path + ")");
  }
  return config;
}

}  // namespace speckle::cfg
