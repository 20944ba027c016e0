#include "speckle/learned/network.hpp"

#include <algorithm>
#include <sstream>

namespace speckle::learned {
namespace {

// Elementwise helpers: routed through the kernel table for float, plain
// loops otherwise (the double instantiation only backs the gradient oracle).
template <typename T>
void relu_inplace(const T* x, T* y, size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active().relu_f32(x, y, n);
  } else {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  }
}

template <typename T>
void relu_grad(const T* x, const T* dy, T* dx, size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active().relu_grad_f32(x, dy, dx, n);
  } else {
    for (size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
  }
}

template <typename T>
void add_scalar(T* x, T b, size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active().scale_bias_f32(x, 1.0f, b, n);
  } else {
    for (size_t i = 0; i < n; ++i) x[i] += b;
  }
}

// x: [C, H, W] single sample -> cols [C*9, H*W], 3x3 neighborhood, zero pad 1.
template <typename T>
void im2col(const T* x, int c_in, int h, int w, T* cols) {
  const int64_t hw = int64_t(h) * w;
  for (int c = 0; c < c_in; ++c) {
    const T* plane = x + int64_t(c) * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* row = cols + (int64_t(c) * 9 + ky * 3 + kx) * hw;
        for (int oy = 0; oy < h; ++oy) {
          const int iy = oy + ky - 1;
          T* out = row + int64_t(oy) * w;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + w, T(0));
            continue;
          }
          const T* src = plane + int64_t(iy) * w;
          for (int ox = 0; ox < w; ++ox) {
            const int ix = ox + kx - 1;
            out[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-add cols back into the input layout.
template <typename T>
void col2im_add(const T* cols, int c_in, int h, int w, T* x) {
  const int64_t hw = int64_t(h) * w;
  for (int c = 0; c < c_in; ++c) {
    T* plane = x + int64_t(c) * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* row = cols + (int64_t(c) * 9 + ky * 3 + kx) * hw;
        for (int oy = 0; oy < h; ++oy) {
          const int iy = oy + ky - 1;
          if (iy < 0 || iy >= h) continue;
          T* dst = plane + int64_t(iy) * w;
          const T* src = row + int64_t(oy) * w;
          for (int ox = 0; ox < w; ++ox) {
            const int ix = ox + kx - 1;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

std::string NetworkSpec::describe() const {
  std::ostringstream s;
  s << "in:" << in_ch << "x" << in_h << "x" << in_w << "|conv3x3p1s1:" << conv_ch[0] << ","
    << conv_ch[1] << "," << conv_ch[2] << "|pool2|mlp:";
  for (size_t i = 0; i < mlp_hidden.size(); ++i) s << (i ? "," : "") << mlp_hidden[i];
  s << "|out:" << out_dim << "|bn";
  return s.str();
}

NetworkSpec NetworkSpec::desk() { return NetworkSpec{}; }

NetworkSpec NetworkSpec::paper() {
  NetworkSpec s;
  s.in_h = 180;
  s.in_w = 320;
  return s;
}

NetworkSpec NetworkSpec::tiny() {
  NetworkSpec s;
  s.in_h = 16;
  s.in_w = 16;
  s.conv_ch = {2, 2, 2};
  s.mlp_hidden = {8, 8, 8, 8, 8};
  return s;
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.mlp_hidden.size() != 5) {
    throw ConfigError("network: exactly six linear layers (five hidden widths) required");
  }
  int c_prev = spec_.in_ch;
  for (int i = 0; i < 3; ++i) {
    const int c_out = spec_.conv_ch[i];
    conv_[i].w = Tensor<T>({c_out, c_prev, 3, 3});
    conv_[i].b = Tensor<T>({c_out});
    conv_bn_[i].gamma = Tensor<T>({c_out});
    conv_bn_[i].beta = Tensor<T>({c_out});
    conv_bn_[i].run_mean = Tensor<T>({c_out});
    conv_bn_[i].run_var = Tensor<T>({c_out});
    c_prev = c_out;
  }
  int64_t in_dim = spec_.flatten_dim();
  for (size_t i = 0; i < 6; ++i) {
    int64_t out_dim = i < 5 ? spec_.mlp_hidden[i] : spec_.out_dim;
    LinLayer lin;
    lin.w = Tensor<T>({out_dim, in_dim});
    lin.b = Tensor<T>({out_dim});
    fc_.push_back(std::move(lin));
    if (i < 5) {
      BnLayer bn;
      bn.gamma = Tensor<T>({out_dim});
      bn.beta = Tensor<T>({out_dim});
      bn.run_mean = Tensor<T>({out_dim});
      bn.run_var = Tensor<T>({out_dim});
      fc_bn_.push_back(std::move(bn));
    }
    in_dim = out_dim;
  }
}

template <typename T>
void Network<T>::init_params(uint64_t seed) {
  Rng rng(derive_seed(seed, "network.init", 0));
  auto he_uniform = [&](Tensor<T>& w, int64_t fan_in) {
    const double limit = std::sqrt(6.0 / double(fan_in));
    for (auto& x : w.v) x = T((2.0 * rng.next_unit() - 1.0) * limit);
  };
  for (int i = 0; i < 3; ++i) {
    he_uniform(conv_[i].w, conv_[i].w.shape[1] * 9);
    std::fill(conv_[i].b.v.begin(), conv_[i].b.v.end(), T(0));
    std::fill(conv_bn_[i].gamma.v.begin(), conv_bn_[i].gamma.v.end(), T(1));
    std::fill(conv_bn_[i].beta.v.begin(), conv_bn_[i].beta.v.end(), T(0));
    std::fill(conv_bn_[i].run_mean.v.begin(), conv_bn_[i].run_mean.v.end(), T(0));
    std::fill(conv_bn_[i].run_var.v.begin(), conv_bn_[i].run_var.v.end(), T(1));
  }
  for (size_t i = 0; i < fc_.size(); ++i) {
    he_uniform(fc_[i].w, fc_[i].w.shape[1]);
    std::fill(fc_[i].b.v.begin(), fc_[i].b.v.end(), T(0));
  }
  for (auto& bn : fc_bn_) {
    std::fill(bn.gamma.v.begin(), bn.gamma.v.end(), T(1));
    std::fill(bn.beta.v.begin(), bn.beta.v.end(), T(0));
    std::fill(bn.run_mean.v.begin(), bn.run_mean.v.end(), T(0));
    std::fill(bn.run_var.v.begin(), bn.run_var.v.end(), T(1));
  }
}

template <typename T>
Tensor<T> Network<T>::run(const Tensor<T>& x, bool training, Cache<T>* cache) const {
  if (x.shape.size() != 4 || x.shape[1] != spec_.in_ch || x.shape[2] != spec_.in_h ||
      x.shape[3] != spec_.in_w) {
    throw ConfigError("network: input shape does not match the architecture");
  }
  if (training && cache == nullptr) throw ConfigError("network: training forward needs a cache");
  const int batch = int(x.shape[0]);
  if (cache) cache->batch = batch;

  Tensor<T> cur = x;
  int h = spec_.in_h, w = spec_.in_w;
  int c_in = spec_.in_ch;
  for (int blk = 0; blk < 3; ++blk) {
    const int c_out = spec_.conv_ch[blk];
    const int64_t hw = int64_t(h) * w;
    if (cache) cache->conv_in[blk] = cur;

    // conv 3x3, stride 1, pad 1 (im2col + gemm per sample)
    Tensor<T> z({batch, c_out, h, w});
    {
      Tensor<T> cols({int64_t(c_in) * 9, hw});
      for (int b = 0; b < batch; ++b) {
        im2col(cur.data() + int64_t(b) * c_in * hw, c_in, h, w, cols.data());
        kernels::gemm<T>(false, false, c_out, int(hw), c_in * 9, T(1), conv_[blk].w.data(),
                         c_in * 9, cols.data(), int(hw), T(0),
                         z.data() + int64_t(b) * c_out * hw, int(hw));
        for (int c = 0; c < c_out; ++c) {
          add_scalar(z.data() + (int64_t(b) * c_out + c) * hw, conv_[blk].b.v[c], size_t(hw));
        }
      }
    }
    if (cache) cache->conv_z[blk] = z;

    // batch norm over (B, H, W) per channel
    const int64_t m = int64_t(batch) * hw;
    std::vector<T> mean(c_out), var(c_out);
    if (training) {
      for (int c = 0; c < c_out; ++c) {
        double s = 0.0, ss = 0.0;
        for (int b = 0; b < batch; ++b) {
          const T* p = z.data() + (int64_t(b) * c_out + c) * hw;
          for (int64_t i = 0; i < hw; ++i) {
            s += double(p[i]);
            ss += double(p[i]) * double(p[i]);
          }
        }
        mean[c] = T(s / double(m));
        var[c] = T(std::max(0.0, ss / double(m) - double(mean[c]) * double(mean[c])));
      }
      cache->bn_mean[blk].assign(mean.begin(), mean.end());
      cache->bn_var[blk].assign(var.begin(), var.end());
    } else {
      for (int c = 0; c < c_out; ++c) {
        mean[c] = conv_bn_[blk].run_mean.v[c];
        var[c] = conv_bn_[blk].run_var.v[c];
      }
    }
    Tensor<T> act({batch, c_out, h, w});
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < c_out; ++c) {
        const T inv = T(1.0 / std::sqrt(double(var[c]) + spec_.bn_eps));
        const T g = conv_bn_[blk].gamma.v[c], beta = conv_bn_[blk].beta.v[c];
        const T* zp = z.data() + (int64_t(b) * c_out + c) * hw;
        T* ap = act.data() + (int64_t(b) * c_out + c) * hw;
        const T scale = g * inv;
        const T bias = beta - mean[c] * scale;
        for (int64_t i = 0; i < hw; ++i) ap[i] = zp[i] * scale + bias;
      }
    }
    relu_inplace(act.data(), act.data(), act.v.size());
    if (cache) cache->act[blk] = act;

    // 2x2 max pool, stride 2, floor semantics (odd trailing row/col dropped)
    const int ph = h / 2, pw = w / 2;
    Tensor<T> pooled({batch, c_out, ph, pw});
    std::vector<int>* idx = cache ? &cache->pool_idx[blk] : nullptr;
    if (idx) idx->assign(pooled.v.size(), 0);
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < c_out; ++c) {
        const T* ap = act.data() + (int64_t(b) * c_out + c) * hw;
        T* pp = pooled.data() + (int64_t(b) * c_out + c) * int64_t(ph) * pw;
        for (int oy = 0; oy < ph; ++oy) {
          for (int ox = 0; ox < pw; ++ox) {
            int best = (2 * oy) * w + 2 * ox;
            T best_v = ap[best];
            const int cand[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                                 (2 * oy + 1) * w + 2 * ox + 1};
            for (int k = 0; k < 3; ++k) {
              if (ap[cand[k]] > best_v) {
                best_v = ap[cand[k]];
                best = cand[k];
              }
            }
            pp[int64_t(oy) * pw + ox] = best_v;
            if (idx) {
              (*idx)[size_t((int64_t(b) * c_out + c) * ph * pw + int64_t(oy) * pw + ox)] = best;
            }
          }
        }
      }
    }
    cur = std::move(pooled);
    h = ph;
    w = pw;
    c_in = c_out;
  }

  // flatten: [B, C*H*W]
  const int64_t flat = spec_.flatten_dim();
  cur.shape = {batch, flat};

  for (size_t layer = 0; layer < fc_.size(); ++layer) {
    const int64_t in_dim = fc_[layer].w.shape[1];
    const int64_t out_dim = fc_[layer].w.shape[0];
    if (cache) {
      cache->fc_in.resize(fc_.size());
      cache->fc_in[layer] = cur;
    }
    Tensor<T> z({batch, out_dim});
    kernels::gemm<T>(false, true, batch, int(out_dim), int(in_dim), T(1), cur.data(),
                     int(in_dim), fc_[layer].w.data(), int(in_dim), T(0), z.data(),
                     int(out_dim));
    for (int b = 0; b < batch; ++b) {
      for (int64_t o = 0; o < out_dim; ++o) z.v[size_t(b) * out_dim + o] += fc_[layer].b.v[o];
    }
    if (layer == fc_.size() - 1) {
      cur = std::move(z);
      break;  // head: no BN, no ReLU
    }
    if (cache) {
      cache->fc_z.resize(fc_.size() - 1);
      cache->fc_z[layer] = z;
    }

    std::vector<T> mean(out_dim), var(out_dim);
    if (training) {
      for (int64_t o = 0; o < out_dim; ++o) {
        double s = 0.0, ss = 0.0;
        for (int b = 0; b < batch; ++b) {
          double val = double(z.v[size_t(b) * out_dim + o]);
          s += val;
          ss += val * val;
        }
        mean[o] = T(s / batch);
        var[o] = T(std::max(0.0, ss / batch - double(mean[o]) * double(mean[o])));
      }
      cache->fc_mean.resize(fc_.size() - 1);
      cache->fc_var.resize(fc_.size() - 1);
      cache->fc_mean[layer].assign(mean.begin(), mean.end());
      cache->fc_var[layer].assign(var.begin(), var.end());
    } else {
      for (int64_t o = 0; o < out_dim; ++o) {
        mean[o] = fc_bn_[layer].run_mean.v[o];
        var[o] = fc_bn_[layer].run_var.v[o];
      }
    }
    Tensor<T> act({batch, out_dim});
    for (int64_t o = 0; o < out_dim; ++o) {
      const T inv = T(1.0 / std::sqrt(double(var[o]) + spec_.bn_eps));
      const T scale = fc_bn_[layer].gamma.v[o] * inv;
      const T bias = fc_bn_[layer].beta.v[o] - mean[o] * scale;
      for (int b = 0; b < batch; ++b) {
        act.v[size_t(b) * out_dim + o] = z.v[size_t(b) * out_dim + o] * scale + bias;
      }
    }
    relu_inplace(act.data(), act.data(), act.v.size());
    if (cache) {
      cache->fc_act.resize(fc_.size() - 1);
      cache->fc_act[layer] = act;
    }
    cur = std::move(act);
  }
  return cur;
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x, bool training, Cache<T>* cache) {
  Tensor<T> out = run(x, training, cache);
  if (training) {
    // Running statistics track the biased batch moments.
    const T mom = T(spec_.bn_momentum);
    for (int blk = 0; blk < 3; ++blk) {
      for (size_t c = 0; c < conv_bn_[blk].run_mean.v.size(); ++c) {
        conv_bn_[blk].run_mean.v[c] =
            (T(1) - mom) * conv_bn_[blk].run_mean.v[c] + mom * cache->bn_mean[blk][c];
        conv_bn_[blk].run_var.v[c] =
            (T(1) - mom) * conv_bn_[blk].run_var.v[c] + mom * cache->bn_var[blk][c];
      }
    }
    for (size_t layer = 0; layer < fc_bn_.size(); ++layer) {
      for (size_t o = 0; o < fc_bn_[layer].run_mean.v.size(); ++o) {
        fc_bn_[layer].run_mean.v[o] =
            (T(1) - mom) * fc_bn_[layer].run_mean.v[o] + mom * cache->fc_mean[layer][o];
        fc_bn_[layer].run_var.v[o] =
            (T(1) - mom) * fc_bn_[layer].run_var.v[o] + mom * cache->fc_var[layer][o];
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> Network<T>::forward_infer(const Tensor<T>& x) const {
  return run(x, false, nullptr);
}

template <typename T>
Tensor<T> Network<T>::backward(const Cache<T>& cache, const Tensor<T>& dout, Network<T>& grads) {
  const int batch = cache.batch;
  Tensor<T> d = dout;  // [B, out_dim]

  // ---- MLP, last layer first.
  for (int layer = int(fc_.size()) - 1; layer >= 0; --layer) {
    const int64_t in_dim = fc_[layer].w.shape[1];
    const int64_t out_dim = fc_[layer].w.shape[0];

    if (size_t(layer) < fc_bn_.size()) {
      // Backward through ReLU (mask on post-activation) then batch norm.
      const Tensor<T>& act = cache.fc_act[layer];
      Tensor<T> dz({batch, out_dim});
      relu_grad(act.data(), d.data(), dz.data(), dz.v.size());

      const Tensor<T>& z = cache.fc_z[layer];
      const auto& mean = cache.fc_mean[layer];
      const auto& var = cache.fc_var[layer];
      Tensor<T> dz_out({batch, out_dim});
      for (int64_t o = 0; o < out_dim; ++o) {
        const double inv = 1.0 / std::sqrt(double(var[o]) + spec_.bn_eps);
        const double g = double(fc_bn_[layer].gamma.v[o]);
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, dgamma = 0.0, dbeta = 0.0;
        for (int b = 0; b < batch; ++b) {
          const double xhat = (double(z.v[size_t(b) * out_dim + o]) - double(mean[o])) * inv;
          const double dy = double(dz.v[size_t(b) * out_dim + o]);
          dgamma += dy * xhat;
          dbeta += dy;
          const double dxhat = dy * g;
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat;
        }
        grads.fc_bn_[layer].gamma.v[o] += T(dgamma);
        grads.fc_bn_[layer].beta.v[o] += T(dbeta);
        for (int b = 0; b < batch; ++b) {
          const double xhat = (double(z.v[size_t(b) * out_dim + o]) - double(mean[o])) * inv;
          const double dxhat = double(dz.v[size_t(b) * out_dim + o]) * g;
          dz_out.v[size_t(b) * out_dim + o] =
              T(inv / batch * (batch * dxhat - sum_dxhat - xhat * sum_dxhat_xhat));
        }
      }
      d = std::move(dz_out);
    }

    // Linear: dW = d^T * x, db = column sums, dx = d * W.
    const Tensor<T>& x_in = cache.fc_in[layer];
    kernels::gemm<T>(true, false, int(out_dim), int(in_dim), batch, T(1), d.data(),
                     int(out_dim), x_in.data(), int(in_dim), T(1), grads.fc_[layer].w.data(),
                     int(in_dim));
    for (int b = 0; b < batch; ++b) {
      for (int64_t o = 0; o < out_dim; ++o) {
        grads.fc_[layer].b.v[o] += d.v[size_t(b) * out_dim + o];
      }
    }
    Tensor<T> dx({batch, in_dim});
    kernels::gemm<T>(false, false, batch, int(in_dim), int(out_dim), T(1), d.data(),
                     int(out_dim), fc_[layer].w.data(), int(in_dim), T(0), dx.data(),
                     int(in_dim));
    d = std::move(dx);
  }

  // ---- conv blocks in reverse; d currently [B, flatten].
  for (int blk = 2; blk >= 0; --blk) {
    const int c_out = spec_.conv_ch[blk];
    const int h = spec_.h_after(blk), w = spec_.w_after(blk);
    const int ph = h / 2, pw = w / 2;
    const int64_t hw = int64_t(h) * w;
    const int c_in = blk == 0 ? spec_.in_ch : spec_.conv_ch[blk - 1];

    // un-pool: route gradients to the argmax positions
    Tensor<T> dact({batch, c_out, h, w});
    const auto& idx = cache.pool_idx[blk];
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < c_out; ++c) {
        const int64_t base_p = (int64_t(b) * c_out + c) * ph * pw;
        const int64_t base_a = (int64_t(b) * c_out + c) * hw;
        for (int64_t i = 0; i < int64_t(ph) * pw; ++i) {
          dact.v[size_t(base_a + idx[size_t(base_p + i)])] += d.v[size_t(base_p + i)];
        }
      }
    }

    // ReLU then batch norm backward (per channel over B, H, W)
    Tensor<T> dz({batch, c_out, h, w});
    relu_grad(cache.act[blk].data(), dact.data(), dz.data(), dz.v.size());
    const Tensor<T>& z = cache.conv_z[blk];
    const auto& mean = cache.bn_mean[blk];
    const auto& var = cache.bn_var[blk];
    const int64_t m = int64_t(batch) * hw;
    Tensor<T> dz_out({batch, c_out, h, w});
    for (int c = 0; c < c_out; ++c) {
      const double inv = 1.0 / std::sqrt(double(var[c]) + spec_.bn_eps);
      const double g = double(conv_bn_[blk].gamma.v[c]);
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, dgamma = 0.0, dbeta = 0.0;
      for (int b = 0; b < batch; ++b) {
        const T* zp = z.data() + (int64_t(b) * c_out + c) * hw;
        const T* dp = dz.data() + (int64_t(b) * c_out + c) * hw;
        for (int64_t i = 0; i < hw; ++i) {
          const double xhat = (double(zp[i]) - double(mean[c])) * inv;
          const double dy = double(dp[i]);
          dgamma += dy * xhat;
          dbeta += dy;
          sum_dxhat += dy * g;
          sum_dxhat_xhat += dy * g * xhat;
        }
      }
      grads.conv_bn_[blk].gamma.v[c] += T(dgamma);
      grads.conv_bn_[blk].beta.v[c] += T(dbeta);
      for (int b = 0; b < batch; ++b) {
        const T* zp = z.data() + (int64_t(b) * c_out + c) * hw;
        const T* dp = dz.data() + (int64_t(b) * c_out + c) * hw;
        T* op = dz_out.data() + (int64_t(b) * c_out + c) * hw;
        for (int64_t i = 0; i < hw; ++i) {
          const double xhat = (double(zp[i]) - double(mean[c])) * inv;
          const double dxhat = double(dp[i]) * g;
          op[i] = T(inv / double(m) * (double(m) * dxhat - sum_dxhat - xhat * sum_dxhat_xhat));
        }
      }
    }

    // conv backward: recompute im2col of the stored input
    const Tensor<T>& x_in = cache.conv_in[blk];
    Tensor<T> dx({batch, c_in, h, w});
    {
      Tensor<T> cols({int64_t(c_in) * 9, hw});
      Tensor<T> dcols({int64_t(c_in) * 9, hw});
      for (int b = 0; b < batch; ++b) {
        im2col(x_in.data() + int64_t(b) * c_in * hw, c_in, h, w, cols.data());
        const T* dz_b = dz_out.data() + int64_t(b) * c_out * hw;
        // dW += dZ * cols^T
        kernels::gemm<T>(false, true, c_out, c_in * 9, int(hw), T(1), dz_b, int(hw),
                         cols.data(), int(hw), T(1), grads.conv_[blk].w.data(), c_in * 9);
        for (int c = 0; c < c_out; ++c) {
          double s = 0.0;
          const T* dp = dz_b + int64_t(c) * hw;
          for (int64_t i = 0; i < hw; ++i) s += double(dp[i]);
          grads.conv_[blk].b.v[c] += T(s);
        }
        // dcols = W^T * dZ, then scatter back
        kernels::gemm<T>(true, false, c_in * 9, int(hw), c_out, T(1), conv_[blk].w.data(),
                         c_in * 9, dz_b, int(hw), T(0), dcols.data(), int(hw));
        col2im_add(dcols.data(), c_in, h, w, dx.data() + int64_t(b) * c_in * hw);
      }
    }
    d = std::move(dx);
  }
  return d;
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::trainable() {
  std::vector<Tensor<T>*> out;
  for (int i = 0; i < 3; ++i) {
    out.push_back(&conv_[i].w);
    out.push_back(&conv_[i].b);
    out.push_back(&conv_bn_[i].gamma);
    out.push_back(&conv_bn_[i].beta);
  }
  for (size_t i = 0; i < fc_.size(); ++i) {
    out.push_back(&fc_[i].w);
    out.push_back(&fc_[i].b);
    if (i < fc_bn_.size()) {
      out.push_back(&fc_bn_[i].gamma);
      out.push_back(&fc_bn_[i].beta);
    }
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Network<T>::state() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  for (int i = 0; i < 3; ++i) {
    std::string p = "conv" + std::to_string(i + 1);
    out.emplace_back(p + ".weight", &conv_[i].w);
    out.emplace_back(p + ".bias", &conv_[i].b);
    std::string bn = "bn" + std::to_string(i + 1);
    out.emplace_back(bn + ".gamma", &conv_bn_[i].gamma);
    out.emplace_back(bn + ".beta", &conv_bn_[i].beta);
    out.emplace_back(bn + ".running_mean", &conv_bn_[i].run_mean);
    out.emplace_back(bn + ".running_var", &conv_bn_[i].run_var);
  }
  for (size_t i = 0; i < fc_.size(); ++i) {
    std::string p = "fc" + std::to_string(i + 1);
    out.emplace_back(p + ".weight", &fc_[i].w);
    out.emplace_back(p + ".bias", &fc_[i].b);
    if (i < fc_bn_.size()) {
      std::string bn = "fcbn" + std::to_string(i + 1);
      out.emplace_back(bn + ".gamma", &fc_bn_[i].gamma);
      out.emplace_back(bn + ".beta", &fc_bn_[i].beta);
      out.emplace_back(bn + ".running_mean", &fc_bn_[i].run_mean);
      out.emplace_back(bn + ".running_var", &fc_bn_[i].run_var);
    }
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> Network<T>::state() const {
  auto mut = const_cast<Network<T>*>(this)->state();
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  out.reserve(mut.size());
  for (auto& [name, ptr] : mut) out.emplace_back(name, ptr);
  return out;
}

template class Network<float>;
template class Network<double>;

}  // namespace speckle::learned
