// Command-line front end: dataset simulation, frame inspection, calibration,
// analytical estimation, training, evaluation and throughput benchmarking.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "speckle/analytical.hpp"
#include "speckle/common.hpp"
#include "speckle/config.hpp"
#include "speckle/dsp.hpp"
#include "speckle/eval.hpp"
#include "speckle/io.hpp"
#include "speckle/learned/infer.hpp"
#include "speckle/learned/preprocess.hpp"
#include "speckle/learned/train.hpp"
#include "speckle/scene.hpp"

namespace fs = std::filesystem;
using namespace speckle;

namespace {

std::string frame_name(int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frames/%06lld.pgm", (long long)index);
  return buf;
}

struct DiskDataset {
  io::DatasetManifest manifest;
  fs::path dir;
  uint64_t hash = 0;

  // Frames of one split as a capture sequence (all splits when split empty).
  scene::CaptureSequence load_split(const std::string& split) const {
    scene::CaptureSequence seq;
    seq.sweep = manifest.sweep;
    seq.optics_params = manifest.optics;
    seq.laser = manifest.laser;
    seq.surface = manifest.surface;
    seq.master_seed = manifest.master_seed;
    seq.surface_seed = manifest.surface_seed;
    for (const auto& rec : manifest.frames) {
      if (!split.empty() && rec.split != split) continue;
      optics::SpeckleFrame frame;
      frame.pixels = io::read_pgm((dir / rec.file).string());
      frame.pose = rec.pose;
      frame.frame_index = rec.frame_index;
      frame.meta = optics::FrameMeta{manifest.optics, manifest.laser};
      seq.frames.push_back(std::move(frame));
      scene::ScheduledFrame sched;
      sched.pose = rec.pose;
      sched.group = rec.group;
      sched.sub_index = rec.sub_index;
      sched.rpm = rec.rpm;
      seq.schedule.push_back(sched);
    }
    return seq;
  }

  // Middle (label) frame of every stack in a split, with its label pose.
  std::vector<std::pair<optics::SpeckleFrame, optics::Pose>> middle_frames(
      const std::string& split) const {
    const int mid = (manifest.sweep.frames_per_pose - 1) / 2;
    std::vector<std::pair<optics::SpeckleFrame, optics::Pose>> out;
    for (const auto& rec : manifest.frames) {
      if (rec.split != split || rec.sub_index != mid) continue;
      optics::SpeckleFrame frame;
      frame.pixels = io::read_pgm((dir / rec.file).string());
      frame.pose = rec.pose;
      frame.frame_index = rec.frame_index;
      frame.meta = optics::FrameMeta{manifest.optics, manifest.laser};
      out.emplace_back(std::move(frame), rec.pose);
    }
    return out;
  }
};

DiskDataset open_dataset(const std::string& dir) {
  DiskDataset ds;
  ds.dir = dir;
  ds.manifest = io::read_manifest((fs::path(dir) / "manifest.json").string());
  ds.hash = io::manifest_hash(ds.manifest);
  return ds;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, uint64_t seed,
                 const std::string& scale) {
  auto config = cfg::load_config(config_path, scale);
  std::printf("simulating %s-scale dataset (seed %llu) ...\n", config.scale.c_str(),
              (unsigned long long)seed);
  auto seq = scene::simulate_dataset(config.sweep, config.optics, config.laser, config.surface,
                                     seed);
  auto groups = scene::schedule_groups(config.sweep);
  auto split = scene::assign_splits(groups, config.split.ratios, config.split.seed);
  static const char* kSplitNames[3] = {"train", "val", "test"};

  fs::create_directories(fs::path(out_dir) / "frames");
  io::DatasetManifest manifest;
  manifest.master_seed = seq.master_seed;
  manifest.surface_seed = seq.surface_seed;
  manifest.optics = config.optics;
  manifest.laser = config.laser;
  manifest.surface = config.surface;
  manifest.sweep = config.sweep;
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    io::FrameRecord rec;
    rec.file = frame_name(seq.frames[i].frame_index);
    rec.frame_index = seq.frames[i].frame_index;
    rec.group = seq.schedule[i].group;
    rec.sub_index = seq.schedule[i].sub_index;
    rec.rpm = seq.schedule[i].rpm;
    rec.pose = seq.schedule[i].pose;
    rec.split = kSplitNames[split[size_t(seq.schedule[i].group)]];
    io::write_pgm((fs::path(out_dir) / rec.file).string(), seq.frames[i].pixels,
                  config.optics.bit_depth);
    manifest.frames.push_back(std::move(rec));
  }
  io::write_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
  std::printf("wrote %zu frames in %zu stacks to %s\n", seq.frames.size(), groups.size(),
              out_dir.c_str());
  return 0;
}

int run_inspect(const std::string& frame_path, const std::string& out_ac,
                const std::string& out_spectrum) {
  optics::SpeckleFrame frame;
  frame.pixels = io::read_pgm(frame_path);
  if (!out_ac.empty()) {
    auto ac = dsp::autocorrelation(frame);
    io::export_grayscale(out_ac, ac.ac);
    std::printf("autocorrelogram -> %s\n", out_ac.c_str());
  }
  if (!out_spectrum.empty()) {
    auto spec = dsp::fft_logmag(frame);
    io::export_grayscale(out_spectrum, spec.logmag);
    std::printf("log-magnitude spectrum -> %s\n", out_spectrum.c_str());
  }
  return 0;
}

int run_calibrate(const std::string& dataset_dir, const std::string& init_path,
                  const std::string& out_path) {
  auto ds = open_dataset(dataset_dir);
  auto init = io::read_calibration(init_path);
  auto labeled = ds.middle_frames("train");
  std::vector<optics::SpeckleFrame> frames;
  frames.reserve(labeled.size());
  for (auto& [frame, pose] : labeled) frames.push_back(std::move(frame));
  std::printf("calibrating on %zu labeled stacks ...\n", frames.size());
  auto result = analytical::calibrate(frames, init);
  io::write_calibration(out_path, result.params);
  std::printf(
      "fitted ratio %.6e (source z %.4f m, residual a1 %.3e a2 %.3e, reference %.2f deg)\n",
      result.params.ratio(), result.params.source_pos_m[2], result.params.residual_a1,
      result.params.residual_a2, result.params.reference_orientation_deg);
  std::printf("loss %.4f px^2 over %d observations after %d accepted steps -> %s\n",
              result.final_loss, result.observations, result.iterations, out_path.c_str());
  return 0;
}

// Analytical per-stack estimates on the middle frames of a split.
eval::MetricsReport analytical_report(const DiskDataset& ds,
                                      const analytical::CalibrationParams& calib,
                                      const std::string& split) {
  auto labeled = ds.middle_frames(split);
  if (labeled.empty()) throw ConfigError("estimate: split '" + split + "' holds no stacks");
  std::vector<optics::Pose> predictions, labels;
  std::vector<optics::Pose> z_predictions, z_labels;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [frame, pose] : labeled) {
    optics::Pose est{0.0, 0.0, pose.d_z_m};  // depth is not an analytical output
    auto peaks = dsp::find_side_peaks(dsp::autocorrelation(frame), 8);
    if (peaks.valid) {
      // Shifts beyond the model range read as the range edge.
      try {
        est.theta_y_deg = analytical::estimate_theta_y(peaks, pose.d_z_m, calib);
      } catch (const ConvergenceError&) {
        est.theta_y_deg = 60.0;
      }
    }
    auto z = analytical::estimate_theta_z(dsp::fft_logmag(frame),
                                          calib.reference_orientation_deg);
    if (z.valid) {
      optics::Pose zp = pose;
      zp.theta_z_deg = z.theta_z_deg;
      z_predictions.push_back(zp);
      z_labels.push_back(pose);
    }
    predictions.push_back(est);
    labels.push_back(pose);
  }
  auto report = eval::mae_std(predictions, labels);
  report.method = "analytical";
  report.split = split;
  report.dataset_hash = ds.hash;
  report.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Depth is not estimated analytically; the in-plane angle only counts
  // stacks with a readable stripe orientation.
  report.depth_cm = eval::TargetMetric{};
  if (!z_predictions.empty()) {
    auto z_metrics = eval::mae_std(z_predictions, z_labels);
    report.theta_z_deg = z_metrics.theta_z_deg;
  } else {
    report.theta_z_deg = eval::TargetMetric{};
  }
  return report;
}

int run_estimate(const std::string& dataset_dir, const std::string& calib_path,
                 const std::string& report_path) {
  auto ds = open_dataset(dataset_dir);
  auto calib = io::read_calibration(calib_path);
  auto report = analytical_report(ds, calib, "test");
  write_text(report_path, eval::report_to_json(report));
  std::printf("analytical on test split: theta_y MAE %.3f deg (std %.3f, n=%d), "
              "theta_z MAE %.3f deg (n=%d)\n",
              report.theta_y_deg.mae, report.theta_y_deg.std_dev, report.theta_y_deg.count,
              report.theta_z_deg.mae, report.theta_z_deg.count);
  return 0;
}

int run_train(const std::string& dataset_dir, const std::string& config_path,
              const std::string& weights_path, const std::string& history_path,
              const std::string& scale) {
  auto config = cfg::load_config(config_path, scale);
  auto ds = open_dataset(dataset_dir);
  auto train_seq = ds.load_split("train");
  auto val_seq = ds.load_split("val");
  auto train_stacks =
      learned::stacks_from_sequence(train_seq, config.train.crop_w, config.train.crop_h);
  auto val_stacks =
      learned::stacks_from_sequence(val_seq, config.train.crop_w, config.train.crop_h);
  std::printf("training on %zu stacks (val %zu), %d epochs, batch %d, lr %g ...\n",
              train_stacks.size(), val_stacks.size(), config.train.epochs, config.train.batch,
              config.train.lr);

  learned::NetworkSpec spec;
  spec.in_h = config.train.crop_h;
  spec.in_w = config.train.crop_w;
  auto result = learned::train(train_stacks, val_stacks, spec, config.train);
  io::write_weights(weights_path, learned::to_weights_file(result.net, config.train));
  if (!history_path.empty()) learned::write_history_csv(history_path, result.history);
  std::printf("best epoch %d (val loss %.6g) -> %s\n", result.best_epoch, result.best_val_loss,
              weights_path.c_str());
  return 0;
}

int run_evaluate(const std::string& dataset_dir, const std::string& weights_path,
                 const std::string& calib_path, const std::string& report_path,
                 const std::string& table_path) {
  auto ds = open_dataset(dataset_dir);
  auto model = learned::from_weights_file(io::read_weights(weights_path));
  auto test_seq = ds.load_split("test");
  auto stacks = learned::stacks_from_sequence(test_seq, model.crop_w, model.crop_h);
  if (stacks.empty()) throw ConfigError("evaluate: test split holds no stacks");

  std::vector<optics::Pose> predictions, labels;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& stack : stacks) {
    learned::Tensor<float> x({1, 5, model.crop_h, model.crop_w});
    x.v = stack.values.v;
    auto out = model.net.forward_infer(x);
    optics::Pose pose;
    pose.theta_y_deg = double(out.v[0]) * model.norm_scale[0] + model.norm_offset[0];
    pose.theta_z_deg = double(out.v[1]) * model.norm_scale[1] + model.norm_offset[1];
    pose.d_z_m = double(out.v[2]) * model.norm_scale[2] + model.norm_offset[2];
    predictions.push_back(pose);
    labels.push_back(stack.label);
  }
  auto learned_report = eval::mae_std(predictions, labels);
  learned_report.method = "learned";
  learned_report.split = "test";
  learned_report.dataset_hash = ds.hash;
  learned_report.weights_fingerprint = model.net.spec().fingerprint();
  learned_report.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string report_json = eval::report_to_json(learned_report);
  std::printf("learned on test split: theta_y MAE %.3f deg, theta_z MAE %.3f deg, depth MAE "
              "%.3f cm (n=%d)\n",
              learned_report.theta_y_deg.mae, learned_report.theta_z_deg.mae,
              learned_report.depth_cm.mae, learned_report.count);

  if (!calib_path.empty()) {
    auto calib = io::read_calibration(calib_path);
    auto analytical = analytical_report(ds, calib, "test");
    std::printf("analytical on the same split: theta_y MAE %.3f deg\n",
                analytical.theta_y_deg.mae);
    report_json = "{\n\"learned\": " + eval::report_to_json(learned_report) +
                  ",\n\"analytical\": " + eval::report_to_json(analytical) + "}\n";
    if (!table_path.empty()) {
      std::string table = eval::comparison_table(analytical, learned_report);
      write_text(table_path, table);
      std::printf("%s", table.c_str());
    }
  } else if (!table_path.empty()) {
    throw ConfigError("evaluate: --table needs --calib for the baseline column");
  }
  write_text(report_path, report_json);
  return 0;
}

int run_bench(const std::string& weights_path, const std::string& dataset_dir, int n_frames) {
  auto ds = open_dataset(dataset_dir);
  auto model = learned::from_weights_file(io::read_weights(weights_path));
  auto seq = ds.load_split("");
  if (seq.frames.empty()) throw ConfigError("bench: dataset holds no frames");
  double fps = eval::bench_throughput(model, seq.frames, n_frames);
  std::printf("throughput: %.1f frames/s (median of 5 runs, %d frames each, single stream)\n",
              fps, n_frames);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser-speckle rotational pose estimation workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scale = "desk";
  uint64_t seed = 42;
  auto* simulate = app.add_subcommand("simulate", "Render a labeled synthetic dataset");
  simulate->add_option("--config", config_path, "JSON config overriding the scale profile");
  simulate->add_option("--out", out_dir, "Output dataset directory")->required();
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--scale", scale, "Scale profile: desk or paper");

  std::string frame_path, out_ac, out_spectrum;
  auto* inspect = app.add_subcommand("inspect", "Emit autocorrelation / spectrum images");
  inspect->add_option("--frame", frame_path, "Input frame (PGM)")->required();
  inspect->add_option("--out-ac", out_ac, "Autocorrelogram image (.png or .pgm)");
  inspect->add_option("--out-spectrum", out_spectrum, "Spectrum image (.png or .pgm)");

  std::string dataset_dir, init_path, out_calib;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the analytical model on a train split");
  calibrate->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  calibrate->add_option("--init", init_path, "Initial calibration file")->required();
  calibrate->add_option("--out", out_calib, "Fitted calibration file")->required();

  std::string calib_path, report_path;
  auto* estimate = app.add_subcommand("estimate", "Analytical estimates on the test split");
  estimate->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  estimate->add_option("--calib", calib_path, "Calibration file")->required();
  estimate->add_option("--report", report_path, "Metrics report (JSON)")->required();

  std::string weights_path, history_path;
  auto* train = app.add_subcommand("train", "Train the learned estimator");
  train->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  train->add_option("--config", config_path, "JSON config overriding the scale profile");
  train->add_option("--out-weights", weights_path, "Weights file")->required();
  train->add_option("--history", history_path, "Training history CSV");
  train->add_option("--scale", scale, "Scale profile: desk or paper");

  std::string table_path;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate weights on the test split");
  evaluate->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  evaluate->add_option("--weights", weights_path, "Weights file")->required();
  evaluate->add_option("--calib", calib_path, "Calibration file for the baseline column");
  evaluate->add_option("--report", report_path, "Metrics report (JSON)")->required();
  evaluate->add_option("--table", table_path, "Comparison table (text)");

  int n_frames = 200;
  auto* bench = app.add_subcommand("bench", "Sliding-window inference throughput");
  bench->add_option("--weights", weights_path, "Weights file")->required();
  bench->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  bench->add_option("--frames", n_frames, "Frames per timed run (>= 50)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  try {
    if (simulate->parsed()) return run_simulate(config_path, out_dir, seed, scale);
    if (inspect->parsed()) return run_inspect(frame_path, out_ac, out_spectrum);
    if (calibrate->parsed()) return run_calibrate(dataset_dir, init_path, out_calib);
    if (estimate->parsed()) return run_estimate(dataset_dir, calib_path, report_path);
    if (train->parsed()) return run_train(dataset_dir, config_path, weights_path, history_path, scale);
    if (evaluate->parsed())
      return run_evaluate(dataset_dir, weights_path, calib_path, report_path, table_path);
    if (bench->parsed()) return run_bench(weights_path, dataset_dir, n_frames);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.trace().empty()) std::cerr << "trace:\n" << e.trace();
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
