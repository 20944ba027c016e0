#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "speckle/common.hpp"
#include "speckle/kernels.hpp"
#include "speckle/rng.hpp"

namespace speckle::learned {

template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    v.assign(size_t(numel_of(shape)), T(0));
  }
  static int64_t numel_of(const std::vector<int64_t>& s) {
    return std::accumulate(s.begin(), s.end(), int64_t(1), std::multiplies<>());
  }
  int64_t numel() const { return int64_t(v.size()); }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
};

// Fixed architecture: three conv blocks (3x3 conv, batch norm, ReLU, 2x2 max
// pool) followed by six linear layers, batch norm + ReLU after each of the
// first five, three outputs. Channel and width choices are configuration;
// the block/layer counts are the contract.
struct NetworkSpec {
  int in_ch = 5;
  int in_h = 128;
  int in_w = 128;
  std::array<int, 3> conv_ch{16, 32, 64};
  std::vector<int> mlp_hidden{512, 256, 128, 64, 32};
  int out_dim = 3;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  // Spatial dims after block i (1-based), floor pooling.
  int h_after(int blocks) const {
    int h = in_h;
    for (int i = 0; i < blocks; ++i) h /= 2;
    return h;
  }
  int w_after(int blocks) const {
    int w = in_w;
    for (int i = 0; i < blocks; ++i) w /= 2;
    return w;
  }
  int64_t flatten_dim() const { return int64_t(conv_ch[2]) * h_after(3) * w_after(3); }

  std::string describe() const;
  uint64_t fingerprint() const { return fnv1a64(describe()); }

  static NetworkSpec desk();
  static NetworkSpec paper();
  static NetworkSpec tiny();  // gradient-check scale: 5x16x16, 2/2/2 channels, width-8 MLP
};

// Forward activations kept for the backward pass.
template <typename T>
struct Cache {
  int batch = 0;
  // Conv blocks: input, pre-BN response, batch stats, post-ReLU map, pool argmax.
  std::array<Tensor<T>, 3> conv_in;
  std::array<Tensor<T>, 3> conv_z;
  std::array<std::vector<T>, 3> bn_mean, bn_var;
  std::array<Tensor<T>, 3> act;
  std::array<std::vector<int>, 3> pool_idx;
  // MLP: input, pre-BN, stats, post-ReLU.
  std::vector<Tensor<T>> fc_in;
  std::vector<Tensor<T>> fc_z;
  std::vector<std::vector<T>> fc_mean, fc_var;
  std::vector<Tensor<T>> fc_act;
};

template <typename T>
class Network {
 public:
  struct ConvLayer {
    Tensor<T> w;  // [out, in, 3, 3]
    Tensor<T> b;  // [out]
  };
  struct BnLayer {
    Tensor<T> gamma, beta;        // trainable
    Tensor<T> run_mean, run_var;  // inference statistics
  };
  struct LinLayer {
    Tensor<T> w;  // [out, in]
    Tensor<T> b;  // [out]
  };

  explicit Network(NetworkSpec spec);

  // Fan-in-scaled uniform init from a fixed stream; BN at identity.
  void init_params(uint64_t seed);

  // x: [B, C, H, W]. Returns normalized outputs [B, out_dim]. In training
  // mode batch statistics are used and running statistics updated; cache is
  // required. Inference mode is const and per-sample independent.
  Tensor<T> forward(const Tensor<T>& x, bool training, Cache<T>* cache);
  Tensor<T> forward_infer(const Tensor<T>& x) const;

  // Reverse-mode gradients for every trainable parameter given
  // dLoss/dOutput; grads must be a zero-initialized same-spec network.
  // Returns dLoss/dInput (discarded by training but cheap to produce).
  Tensor<T> backward(const Cache<T>& cache, const Tensor<T>& dout, Network<T>& grads);

  // Trainable parameters in a fixed canonical order.
  std::vector<Tensor<T>*> trainable();
  // Everything persisted: trainable + running statistics, with names.
  std::vector<std::pair<std::string, Tensor<T>*>> state();
  std::vector<std::pair<std::string, const Tensor<T>*>> state() const;

  const NetworkSpec& spec() const { return spec_; }

  std::array<ConvLayer, 3>& conv_layers() { return conv_; }
  std::vector<LinLayer>& fc_layers() { return fc_; }

 private:
  // Shared path; training mode reads batch statistics into the cache but
  // leaves the running statistics to forward().
  Tensor<T> run(const Tensor<T>& x, bool training, Cache<T>* cache) const;

  NetworkSpec spec_;
  std::array<ConvLayer, 3> conv_;
  std::array<BnLayer, 3> conv_bn_;
  std::vector<LinLayer> fc_;   // six layers
  std::vector<BnLayer> fc_bn_; // five, after fc1..fc5
};

extern template class Network<float>;
extern template class Network<double>;
extern template struct Cache<float>;
extern template struct Cache<double>;

}  // namespace speckle::learned
