#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "speckle/common.hpp"
#include "speckle/eval.hpp"

namespace speckle::eval {
namespace {

TargetMetric metric_of(const std::vector<double>& abs_errors) {
  TargetMetric m;
  m.count = int(abs_errors.size());
  if (abs_errors.empty()) return m;
  double sum = 0.0;
  for (double e : abs_errors) sum += e;
  m.mae = sum / double(abs_errors.size());
  double ss = 0.0;
  for (double e : abs_errors) ss += (e - m.mae) * (e - m.mae);
  m.std_dev = std::sqrt(ss / double(abs_errors.size()));
  return m;
}

std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", (unsigned long long)v);
  return buf;
}

}  // namespace

MetricsReport mae_std(std::span<const optics::Pose> predictions,
                      std::span<const optics::Pose> labels) {
  if (predictions.size() != labels.size()) {
    throw ConfigError("metrics: prediction/label count mismatch");
  }
  if (predictions.empty()) throw ConfigError("metrics: empty sample set");
  std::vector<double> ey, ez, ed;
  ey.reserve(predictions.size());
  for (size_t i = 0; i < predictions.size(); ++i) {
    ey.push_back(std::abs(predictions[i].theta_y_deg - labels[i].theta_y_deg));
    ez.push_back(std::abs(predictions[i].theta_z_deg - labels[i].theta_z_deg));
    ed.push_back(std::abs(predictions[i].d_z_m - labels[i].d_z_m) * 100.0);
  }
  MetricsReport report;
  report.theta_y_deg = metric_of(ey);
  report.theta_z_deg = metric_of(ez);
  report.depth_cm = metric_of(ed);
  report.count = int(predictions.size());
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["method"] = report.method;
  j["split"] = report.split;
  j["count"] = report.count;
  j["dataset_hash"] = hex64(report.dataset_hash);
  j["weights_fingerprint"] = hex64(report.weights_fingerprint);
  j["elapsed_s"] = report.elapsed_s;
  auto put = [&](const char* key, const TargetMetric& m) {
    j[key] = {{"mae", m.mae}, {"std", m.std_dev}, {"count", m.count}};
  };
  put("theta_y_deg", report.theta_y_deg);
  put("theta_z_deg", report.theta_z_deg);
  put("depth_cm", report.depth_cm);
  return j.dump(2) + "\n";
}

std::string comparison_table(const MetricsReport& analytical, const MetricsReport& learned) {
  if (analytical.dataset_hash != learned.dataset_hash || analytical.split != learned.split) {
    throw ConvergenceError("comparison: reports come from different datasets or splits");
  }
  std::ostringstream out;
  char line[160];
  out << "method                type  dof  sensors  acc_y reference (hardware)  acc_y this run "
         "(synthetic)\n";
  std::snprintf(line, sizeof line,
                "%-20s  %-4s  %3d  %7d  %21.1f  %25.2f\n", "learned (this work)", "abs", 3, 1,
                0.3, learned.theta_y_deg.mae);
  out << line;
  std::snprintf(line, sizeof line,
                "%-20s  %-4s  %3d  %7d  %21.1f  %25.2f\n", "analytical baseline", "abs", 2, 1,
                0.6, analytical.theta_y_deg.mae);
  out << line;
  std::snprintf(line, sizeof line, "split: %s, samples: %d, dataset: %s\n",
                learned.split.c_str(), learned.count, hex64(learned.dataset_hash).c_str());
  out << line;
  return out.str();
}

double bench_throughput(const learned::LoadedModel& model,
                        std::span<const optics::SpeckleFrame> frames, int n_frames, int runs) {
  if (frames.empty()) throw ConfigError("bench: no frames");
  if (n_frames < 50) throw ConfigError("bench: need at least 50 frames per run");
  std::vector<double> rates;
  for (int r = 0; r < runs; ++r) {
    learned::StreamEstimator stream(model);
    for (int i = 0; i < n_frames; ++i) stream.push(frames[size_t(i) % frames.size()]);
    rates.push_back(stream.stats().frames_per_second());
  }
  std::sort(rates.begin(), rates.end());
  return rates[rates.size() / 2];
}

}  // namespace speckle::eval
