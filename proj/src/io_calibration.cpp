#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "speckle/common.hpp"
#include "speckle/io.hpp"

namespace speckle::io {
namespace {

// Shortest round-trip decimal; std::to_chars is locale independent.
std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw IoError("calibration: bad numeric value for '" + key + "': " + s);
  }
  return v;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

}  // namespace

void write_calibration(const std::string& path, const analytical::CalibrationParams& params) {
  std::ostringstream out;
  out << "format_version = 1\n";
  out << "lambda0_m = " << format_double(params.lambda0_m) << "\n";
  out << "delta_lambda_m = " << format_double(params.delta_lambda_m) << "\n";
  out << "source_x_m = " << format_double(params.source_pos_m[0]) << "\n";
  out << "source_y_m = " << format_double(params.source_pos_m[1]) << "\n";
  out << "source_z_m = " << format_double(params.source_pos_m[2]) << "\n";
  out << "pitch_m = " << format_double(params.pitch_m) << "\n";
  out << "residual_a1 = " << format_double(params.residual_a1) << "\n";
  out << "residual_a2 = " << format_double(params.residual_a2) << "\n";
  out << "reference_orientation_deg = " << format_double(params.reference_orientation_deg)
      << "\n";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("calibration: cannot open for writing: " + path);
  f << out.str();
  if (!f) throw IoError("calibration: short write: " + path);
}

analytical::CalibrationParams read_calibration(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("calibration: cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw IoError("calibration: line " + std::to_string(line_no) + " is not 'name = value': " +
                    path);
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  auto need = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("calibration: missing key '" + std::string(key) + "': " + path);
    return it->second;
  };
  if (need("format_version") != "1") throw IoError("calibration: unsupported format version: " + path);

  analytical::CalibrationParams p;
  p.lambda0_m = parse_double(need("lambda0_m"), "lambda0_m");
  p.delta_lambda_m = parse_double(need("delta_lambda_m"), "delta_lambda_m");
  p.source_pos_m[0] = parse_double(need("source_x_m"), "source_x_m");
  p.source_pos_m[1] = parse_double(need("source_y_m"), "source_y_m");
  p.source_pos_m[2] = parse_double(need("source_z_m"), "source_z_m");
  p.pitch_m = parse_double(need("pitch_m"), "pitch_m");
  p.residual_a1 = parse_double(need("residual_a1"), "residual_a1");
  p.residual_a2 = parse_double(need("residual_a2"), "residual_a2");
  p.reference_orientation_deg =
      parse_double(need("reference_orientation_deg"), "reference_orientation_deg");
  p.validate();
  return p;
}

}  // namespace speckle::io
