#include "speckle/learned/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace speckle::learned {
namespace {

// One Adam state pair per trainable tensor.
struct AdamState {
  std::vector<std::vector<float>> m, v;
  int64_t step = 0;
};

double mse_and_grad(const Tensor<float>& out, const std::vector<std::array<float, 3>>& targets,
                    std::span<const int> index, Tensor<float>* dout) {
  const int batch = int(out.shape[0]);
  const int dim = int(out.shape[1]);
  if (dout) *dout = Tensor<float>({batch, dim});
  double loss = 0.0;
  const double scale = 1.0 / (double(batch) * dim);
  for (int b = 0; b < batch; ++b) {
    for (int k = 0; k < dim; ++k) {
      const double diff =
          double(out.v[size_t(b) * dim + k]) - double(targets[size_t(index[b])][size_t(k)]);
      loss += diff * diff * scale;
      if (dout) dout->v[size_t(b) * dim + k] = float(2.0 * diff * scale);
    }
  }
  return loss;
}

Tensor<float> gather_batch(const std::vector<InputStack>& stacks, std::span<const int> index,
                           const NetworkSpec& spec) {
  const int batch = int(index.size());
  Tensor<float> x({batch, spec.in_ch, spec.in_h, spec.in_w});
  const int64_t sample = int64_t(spec.in_ch) * spec.in_h * spec.in_w;
  for (int b = 0; b < batch; ++b) {
    const auto& s = stacks[size_t(index[size_t(b)])];
    if (s.values.numel() != sample) {
      throw ConfigError("train: stack shape does not match the network input");
    }
    std::copy(s.values.v.begin(), s.values.v.end(), x.v.begin() + int64_t(b) * sample);
  }
  return x;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (lr <= 0.0 || beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0 || eps <= 0.0) {
    throw ConfigError("train: optimizer constants out of range");
  }
  if (batch < 2) throw ConfigError("train: batch must be >= 2 (batch norm needs statistics)");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (crop_w <= 0 || crop_h <= 0) throw ConfigError("train: crop dims must be positive");
  for (double s : norm_scale) {
    if (s <= 0.0) throw ConfigError("train: normalization scales must be positive");
  }
}

std::array<float, 3> TrainConfig::normalize(const optics::Pose& pose) const {
  return {float((pose.theta_y_deg - norm_offset[0]) / norm_scale[0]),
          float((pose.theta_z_deg - norm_offset[1]) / norm_scale[1]),
          float((pose.d_z_m - norm_offset[2]) / norm_scale[2])};
}

optics::Pose TrainConfig::denormalize(const std::array<float, 3>& y) const {
  return optics::Pose{double(y[0]) * norm_scale[0] + norm_offset[0],
                      double(y[1]) * norm_scale[1] + norm_offset[1],
                      double(y[2]) * norm_scale[2] + norm_offset[2]};
}

TrainResult train(const std::vector<InputStack>& train_stacks,
                  const std::vector<InputStack>& val_stacks, const NetworkSpec& spec,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_stacks.empty()) throw ConfigError("train: empty training set");

  std::vector<std::array<float, 3>> train_targets, val_targets;
  for (const auto& s : train_stacks) train_targets.push_back(cfg.normalize(s.label));
  for (const auto& s : val_stacks) val_targets.push_back(cfg.normalize(s.label));

  Network<float> net(spec);
  net.init_params(cfg.seed);
  Network<float> best = net;

  auto params = net.trainable();
  AdamState adam;
  adam.m.resize(params.size());
  adam.v.resize(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    adam.m[i].assign(params[i]->v.size(), 0.0f);
    adam.v[i].assign(params[i]->v.size(), 0.0f);
  }

  Rng shuffle_rng(derive_seed(cfg.seed, "train.shuffle", 0));
  std::vector<int> order(train_stacks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);

  TrainResult result{std::move(net), {}, 0, 1e300};

  auto eval_loss = [&](const std::vector<InputStack>& stacks,
                       const std::vector<std::array<float, 3>>& targets) {
    if (stacks.empty()) return 0.0;
    double total = 0.0;
    int counted = 0;
    const int eval_batch = 32;
    for (size_t at = 0; at < stacks.size(); at += eval_batch) {
      const int b = int(std::min<size_t>(eval_batch, stacks.size() - at));
      std::vector<int> idx(b);
      for (int k = 0; k < b; ++k) idx[size_t(k)] = int(at) + k;
      Tensor<float> x = gather_batch(stacks, idx, spec);
      Tensor<float> out = result.net.forward_infer(x);
      total += mse_and_grad(out, targets, idx, nullptr) * b;
      counted += b;
    }
    return total / counted;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates reshuffle per epoch from the dedicated stream.
    for (int i = int(order.size()) - 1; i > 0; --i) {
      std::swap(order[size_t(i)], order[shuffle_rng.next_below(uint64_t(i) + 1)]);
    }
    double epoch_loss = 0.0;
    int used = 0;
    for (size_t at = 0; at < order.size(); at += cfg.batch) {
      const int b = int(std::min<size_t>(cfg.batch, order.size() - at));
      if (b < 2) break;  // a trailing singleton has no batch statistics
      std::vector<int> idx(order.begin() + at, order.begin() + at + b);
      Tensor<float> x = gather_batch(train_stacks, idx, spec);
      Cache<float> cache;
      Tensor<float> out = result.net.forward(x, true, &cache);
      Tensor<float> dout;
      double loss = mse_and_grad(out, train_targets, idx, &dout);
      if (!std::isfinite(loss)) {
        throw ConvergenceError("train: loss became non-finite (learning rate too high?)");
      }
      epoch_loss += loss * b;
      used += b;

      Network<float> grads(spec);
      result.net.backward(cache, dout, grads);
      auto grad_tensors = grads.trainable();
      auto param_tensors = result.net.trainable();
      adam.step += 1;
      const float bc1 = 1.0f / (1.0f - std::pow(float(cfg.beta1), float(adam.step)));
      const float bc2 = 1.0f / (1.0f - std::pow(float(cfg.beta2), float(adam.step)));
      for (size_t p = 0; p < param_tensors.size(); ++p) {
        kernels::active().adam_step_f32(param_tensors[p]->data(), grad_tensors[p]->data(),
                                        adam.m[p].data(), adam.v[p].data(),
                                        param_tensors[p]->v.size(), float(cfg.lr),
                                        float(cfg.beta1), float(cfg.beta2), float(cfg.eps),
                                        bc1, bc2);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = used > 0 ? epoch_loss / used : 0.0;
    stats.val_loss = eval_loss(val_stacks, val_targets);
    result.history.push_back(stats);

    const double tracked = val_stacks.empty() ? stats.train_loss : stats.val_loss;
    if (tracked < result.best_val_loss) {
      result.best_val_loss = tracked;
      result.best_epoch = epoch;
      best = result.net;
    }
  }
  result.net = std::move(best);
  return result;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("history: cannot open for writing: " + path);
  f << "epoch,train_loss,val_loss\n";
  for (const auto& row : history) {
    f << row.epoch << "," << format_double(row.train_loss) << ","
      << format_double(row.val_loss) << "\n";
  }
}

io::WeightsFile to_weights_file(const Network<float>& net, const TrainConfig& cfg) {
  io::WeightsFile file;
  file.fingerprint = net.spec().fingerprint();
  for (const auto& [name, tensor] : net.state()) {
    io::NamedTensor t;
    t.name = name;
    for (int64_t d : tensor->shape) t.dims.push_back(uint32_t(d));
    t.values = tensor->v;
    file.tensors.push_back(std::move(t));
  }
  const auto& spec = net.spec();
  io::NamedTensor arch;
  arch.name = "arch.dims";
  std::vector<int64_t> dims = {spec.in_ch,        spec.in_h,          spec.in_w,
                               spec.conv_ch[0],   spec.conv_ch[1],    spec.conv_ch[2],
                               spec.mlp_hidden[0], spec.mlp_hidden[1], spec.mlp_hidden[2],
                               spec.mlp_hidden[3], spec.mlp_hidden[4], spec.out_dim};
  arch.dims = {uint32_t(dims.size())};
  for (int64_t d : dims) arch.values.push_back(float(d));
  file.tensors.push_back(std::move(arch));

  io::NamedTensor offset{"norm.offset", {3}, {float(cfg.norm_offset[0]), float(cfg.norm_offset[1]),
                                              float(cfg.norm_offset[2])}};
  io::NamedTensor scale{"norm.scale", {3}, {float(cfg.norm_scale[0]), float(cfg.norm_scale[1]),
                                            float(cfg.norm_scale[2])}};
  file.tensors.push_back(std::move(offset));
  file.tensors.push_back(std::move(scale));
  return file;
}

LoadedModel from_weights_file(const io::WeightsFile& file) {
  auto find = [&](const std::string& name) -> const io::NamedTensor* {
    for (const auto& t : file.tensors) {
      if (t.name == name) return &t;
    }
    return nullptr;
  };
  const auto* arch = find("arch.dims");
  if (!arch || arch->values.size() != 12) {
    throw IoError("weights: missing or malformed arch.dims tensor");
  }
  NetworkSpec spec;
  spec.in_ch = int(arch->values[0]);
  spec.in_h = int(arch->values[1]);
  spec.in_w = int(arch->values[2]);
  spec.conv_ch = {int(arch->values[3]), int(arch->values[4]), int(arch->values[5])};
  spec.mlp_hidden = {int(arch->values[6]), int(arch->values[7]), int(arch->values[8]),
                     int(arch->values[9]), int(arch->values[10])};
  spec.out_dim = int(arch->values[11]);
  if (spec.fingerprint() != file.fingerprint) {
    throw IoError("weights: arch.dims disagrees with the stored fingerprint");
  }

  LoadedModel model{Network<float>(spec), {}, {}, spec.in_w, spec.in_h};
  for (auto& [name, tensor] : model.net.state()) {
    const auto* src = find(name);
    if (!src) throw IoError("weights: missing tensor: " + name);
    if (int64_t(src->values.size()) != tensor->numel()) {
      throw IoError("weights: shape mismatch for tensor: " + name);
    }
    tensor->v = src->values;
  }
  const auto* off = find("norm.offset");
  const auto* sc = find("norm.scale");
  if (!off || !sc || off->values.size() != 3 || sc->values.size() != 3) {
    throw IoError("weights: missing normalization tensors");
  }
  for (int k = 0; k < 3; ++k) {
    model.norm_offset[size_t(k)] = off->values[size_t(k)];
    model.norm_scale[size_t(k)] = sc->values[size_t(k)];
  }
  return model;
}

}  // namespace speckle::learned
