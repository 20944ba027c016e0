#include "speckle/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstring>

#include "speckle/parallel.hpp"

namespace speckle::kernels {

#if defined(__x86_64__)
const Ops* avx2_ops_table();  // defined in kernels_avx2.cpp
#endif

const Ops* avx2_ops() {
#if defined(__x86_64__)
  static const Ops* table = []() -> const Ops* {
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      return avx2_ops_table();
    }
    return nullptr;
  }();
  return table;
#else
  return nullptr;
#endif
}

const Ops& active() {
  static const Ops* chosen = [] {
    const char* env = std::getenv("SPECKLE_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_ops();
    const Ops* simd = avx2_ops();
    if (env != nullptr && std::strcmp(env, "avx2") == 0 && simd == nullptr) {
      return &scalar_ops();  // requested ISA unavailable, fall back
    }
    return simd != nullptr ? simd : &scalar_ops();
  }();
  return *chosen;
}

void gemm_f32(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
              const float* b, int ldb, float beta, float* c, int ldc) {
  const Ops& ops = active();
  const int64_t flops = 2LL * m * n * k;
  const int threads = worker_count();
  // Row-partition (or column-partition) the output across the pool. Every C
  // element keeps a single accumulation chain, so the result is identical
  // for any thread count.
  if (threads > 1 && flops >= (1 << 21)) {
    if (m >= 2 * threads) {
      int64_t grain = (m + threads - 1) / threads;
      parallel_for(m, grain, [&](int64_t i0, int64_t i1) {
        const float* ab = ta ? a + i0 : a + i0 * lda;
        ops.gemm_f32(ta, tb, int(i1 - i0), n, k, alpha, ab, lda, b, ldb, beta,
                     c + i0 * ldc, ldc);
      });
      return;
    }
    if (n >= 16 * threads) {
      int64_t grain = (n + threads - 1) / threads;
      grain = ((grain + 15) / 16) * 16;  // keep vector-friendly block starts
      parallel_for(n, grain, [&](int64_t j0, int64_t j1) {
        const float* bb = tb ? b + j0 * ldb : b + j0;
        ops.gemm_f32(ta, tb, m, int(j1 - j0), k, alpha, a, lda, bb, ldb, beta,
                     c + j0, ldc);
      });
      return;
    }
  }
  ops.gemm_f32(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace speckle::kernels
