#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speckle/analytical.hpp"
#include "speckle/image.hpp"
#include "speckle/optics.hpp"
#include "speckle/scene.hpp"

namespace speckle::io {

// ---- frames: binary PGM ("P5"), 16-bit samples big-endian per the format.

void write_pgm(const std::string& path, const Image<uint16_t>& img, int bit_depth);
Image<uint16_t> read_pgm(const std::string& path, int* bit_depth_out = nullptr);

// ---- dataset manifest: canonical JSON (sorted keys, stable float encoding;
// two writes of equal content are byte-identical). Unknown keys are rejected
// on load for the current format version.

struct FrameRecord {
  std::string file;
  int64_t frame_index = 0;
  int group = 0;
  int sub_index = 0;
  double rpm = 0.0;
  optics::Pose pose;
  std::string split;  // "train" | "val" | "test"
};

struct DatasetManifest {
  int format_version = 1;
  uint64_t master_seed = 0;
  uint64_t surface_seed = 0;
  optics::OpticalParams optics;
  optics::LaserSpec laser;
  scene::SurfaceConfig surface;
  scene::SweepSpec sweep;
  std::vector<FrameRecord> frames;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
void write_manifest(const std::string& path, const DatasetManifest& manifest);
// Validates version and keys; with check_files, verifies every referenced
// frame file exists next to the manifest.
DatasetManifest read_manifest(const std::string& path, bool check_files = true);
uint64_t manifest_hash(const DatasetManifest& manifest);

// ---- network weights: little-endian binary
//   magic "SPKW", u32 version, u32 tensor count, u64 architecture
//   fingerprint; per tensor: u16 name length, name, u8 ndim, u32 dims[],
//   f32 values row-major.

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> values;
};

struct WeightsFile {
  uint32_t version = 1;
  uint64_t fingerprint = 0;
  std::vector<NamedTensor> tensors;
};

void write_weights(const std::string& path, const WeightsFile& weights);
// Throws IoError on bad magic/version/truncation; when expect_fingerprint is
// given and differs, the error names both hashes.
WeightsFile read_weights(const std::string& path,
                         std::optional<uint64_t> expect_fingerprint = std::nullopt);

// ---- calibration: flat "name = value" text, locale-independent decimals.

void write_calibration(const std::string& path, const analytical::CalibrationParams& params);
analytical::CalibrationParams read_calibration(const std::string& path);

// ---- diagnostic image export (min-max normalized grayscale), format by
// extension: .pgm or .png.

void export_grayscale(const std::string& path, const Image<double>& img);

}  // namespace speckle::io
