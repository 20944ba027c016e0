#pragma once

#include <string>

#include "json.hpp"
#include "speckle/learned/train.hpp"
#include "speckle/optics.hpp"
#include "speckle/scene.hpp"

namespace speckle::cfg {

struct SplitConfig {
  scene::SplitRatios ratios;
  uint64_t seed = 1234;
};

// Everything a run needs; JSON config files override fields of a scale
// profile. Unknown keys are rejected.
struct AppConfig {
  std::string scale = "desk";
  optics::OpticalParams optics;
  optics::LaserSpec laser;
  scene::SurfaceConfig surface;
  scene::SweepSpec sweep;
  SplitConfig split;
  learned::TrainConfig train;
};

// Desk scale: 512 grid at 10 um pitch, 256x256 sensor, wide line spacing so
// side peaks resolve from 5 degrees up, 128x128 network crops. Runs in
// minutes end to end.
AppConfig desk_profile();
// Paper scale: 1024 grid at 3.45 um pitch, 640x360 sensor, 0.2 nm line
// spacing, 320x180 crops.
AppConfig paper_profile();

AppConfig profile_for(const std::string& scale);
// Profile defaults for `scale`, overridden by the JSON file when non-empty.
AppConfig load_config(const std::string& path, const std::string& scale);

// Strict JSON codecs shared by config files and dataset manifests.
nlohmann::json to_json(const optics::OpticalParams& v);
nlohmann::json to_json(const optics::LaserSpec& v);
nlohmann::json to_json(const optics::ApertureSpec& v);
nlohmann::json to_json(const scene::SurfaceConfig& v);
nlohmann::json to_json(const scene::SweepSpec& v);
nlohmann::json to_json(const learned::TrainConfig& v);

void read_into(const nlohmann::json& j, optics::OpticalParams& v, const std::string& ctx);
void read_into(const nlohmann::json& j, optics::LaserSpec& v, const std::string& ctx);
void read_into(const nlohmann::json& j, optics::ApertureSpec& v, const std::string& ctx);
void read_into(const nlohmann::json& j, scene::SurfaceConfig& v, const std::string& ctx);
void read_into(const nlohmann::json& j, scene::SweepSpec& v, const std::string& ctx);
void read_into(const nlohmann::json& j, learned::TrainConfig& v, const std::string& ctx);

}  // namespace speckle::cfg
