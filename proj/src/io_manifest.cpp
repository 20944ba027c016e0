#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "speckle/common.hpp"
#include "speckle/config.hpp"
#include "speckle/io.hpp"
#include "speckle/rng.hpp"

namespace speckle::io {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw IoError("manifest: " + ctx + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) throw IoError("manifest: unknown key '" + key + "' in " + ctx);
  }
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& manifest) {
  json j;
  j["format_version"] = manifest.format_version;
  j["master_seed"] = manifest.master_seed;
  j["surface_seed"] = manifest.surface_seed;
  j["optics"] = cfg::to_json(manifest.optics);
  j["laser"] = cfg::to_json(manifest.laser);
  j["surface"] = cfg::to_json(manifest.surface);
  j["sweep"] = cfg::to_json(manifest.sweep);
  json frames = json::array();
  for (const auto& f : manifest.frames) {
    frames.push_back(json{{"file", f.file},
                          {"frame_index", f.frame_index},
                          {"group", f.group},
                          {"sub_index", f.sub_index},
                          {"rpm", f.rpm},
                          {"theta_y_deg", f.pose.theta_y_deg},
                          {"theta_z_deg", f.pose.theta_z_deg},
                          {"d_z_m", f.pose.d_z_m},
                          {"split", f.split}});
  }
  j["frames"] = std::move(frames);
  // nlohmann objects iterate alphabetically and print shortest-round-trip
  // floats, so equal content serializes byte-identically.
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: JSON parse error: ") + e.what());
  }
  check_keys(j,
             {"format_version", "master_seed", "surface_seed", "optics", "laser", "surface",
              "sweep", "frames"},
             "manifest");
  DatasetManifest m;
  if (!j.contains("format_version")) throw IoError("manifest: missing format_version");
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1) {
    throw IoError("manifest: unsupported format_version " + std::to_string(m.format_version));
  }
  m.master_seed = j.at("master_seed").get<uint64_t>();
  m.surface_seed = j.at("surface_seed").get<uint64_t>();
  try {
    cfg::read_into(j.at("optics"), m.optics, "manifest.optics");
    cfg::read_into(j.at("laser"), m.laser, "manifest.laser");
    cfg::read_into(j.at("surface"), m.surface, "manifest.surface");
    cfg::read_into(j.at("sweep"), m.sweep, "manifest.sweep");
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  for (const auto& fj : j.at("frames")) {
    check_keys(fj,
               {"file", "frame_index", "group", "sub_index", "rpm", "theta_y_deg",
                "theta_z_deg", "d_z_m", "split"},
               "manifest.frames[]");
    FrameRecord f;
    f.file = fj.at("file").get<std::string>();
    f.frame_index = fj.at("frame_index").get<int64_t>();
    f.group = fj.at("group").get<int>();
    f.sub_index = fj.at("sub_index").get<int>();
    f.rpm = fj.at("rpm").get<double>();
    f.pose.theta_y_deg = fj.at("theta_y_deg").get<double>();
    f.pose.theta_z_deg = fj.at("theta_z_deg").get<double>();
    f.pose.d_z_m = fj.at("d_z_m").get<double>();
    f.split = fj.at("split").get<std::string>();
    if (f.split != "train" && f.split != "val" && f.split != "test") {
      throw IoError("manifest: bad split label '" + f.split + "'");
    }
    m.frames.push_back(std::move(f));
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("manifest: cannot open for writing: " + path);
  f << manifest_to_json(manifest);
  if (!f) throw IoError("manifest: short write: " + path);
}

DatasetManifest read_manifest(const std::string& path, bool check_files) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("manifest: cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  DatasetManifest m = manifest_from_json(text);
  if (check_files) {
    const auto dir = std::filesystem::path(path).parent_path();
    for (const auto& frame : m.frames) {
      if (!std::filesystem::exists(dir / frame.file)) {
        throw IoError("manifest: missing frame file: " + (dir / frame.file).string());
      }
    }
  }
  return m;
}

uint64_t manifest_hash(const DatasetManifest& manifest) {
  return fnv1a64(manifest_to_json(manifest));
}

}  // namespace speckle::io
