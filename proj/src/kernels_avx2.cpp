// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers reach it only through the dispatch table after a
// CPUID check. Elementwise kernels keep the scalar expression order so they
// match the reference bitwise; gemm and the reductions reassociate and are
// equivalence-tested with tolerances instead.
#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>
#include <complex>
#include <cstddef>

#include "speckle/kernels.hpp"

namespace speckle::kernels {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum4d(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// Shared micro-kernel for the NN and TN paths: rows of op(A) are addressed
// as a_row(i) with elements k * a_step apart, B and C are plain row major.
// 4-row by 16-column register tile, scalar tails.
void gemm_rowmajor_b(int m, int n, int k, float alpha, const float* a, int a_row_stride,
                     int a_step, const float* b, int ldb, float beta, float* c, int ldc) {
  auto a_at = [&](int i, int p) -> float { return a[size_t(i) * a_row_stride + size_t(p) * a_step]; };
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
      __m256 acc00 = _mm256_setzero_ps(), acc01 = _mm256_setzero_ps();
      __m256 acc10 = _mm256_setzero_ps(), acc11 = _mm256_setzero_ps();
      __m256 acc20 = _mm256_setzero_ps(), acc21 = _mm256_setzero_ps();
      __m256 acc30 = _mm256_setzero_ps(), acc31 = _mm256_setzero_ps();
      for (int p = 0; p < k; ++p) {
        __m256 b0 = _mm256_loadu_ps(b + size_t(p) * ldb + j);
        __m256 b1 = _mm256_loadu_ps(b + size_t(p) * ldb + j + 8);
        __m256 a0 = _mm256_set1_ps(a_at(i + 0, p));
        __m256 a1 = _mm256_set1_ps(a_at(i + 1, p));
        __m256 a2 = _mm256_set1_ps(a_at(i + 2, p));
        __m256 a3 = _mm256_set1_ps(a_at(i + 3, p));
        acc00 = _mm256_fmadd_ps(a0, b0, acc00);
        acc01 = _mm256_fmadd_ps(a0, b1, acc01);
        acc10 = _mm256_fmadd_ps(a1, b0, acc10);
        acc11 = _mm256_fmadd_ps(a1, b1, acc11);
        acc20 = _mm256_fmadd_ps(a2, b0, acc20);
        acc21 = _mm256_fmadd_ps(a2, b1, acc21);
        acc30 = _mm256_fmadd_ps(a3, b0, acc30);
        acc31 = _mm256_fmadd_ps(a3, b1, acc31);
      }
      __m256 valpha = _mm256_set1_ps(alpha);
      __m256 vbeta = _mm256_set1_ps(beta);
      __m256 accs[4][2] = {{acc00, acc01}, {acc10, acc11}, {acc20, acc21}, {acc30, acc31}};
      for (int r = 0; r < 4; ++r) {
        float* out = c + size_t(i + r) * ldc + j;
        for (int h = 0; h < 2; ++h) {
          __m256 res = _mm256_mul_ps(valpha, accs[r][h]);
          if (beta != 0.0f) res = _mm256_fmadd_ps(vbeta, _mm256_loadu_ps(out + 8 * h), res);
          _mm256_storeu_ps(out + 8 * h, res);
        }
      }
    }
    for (; i < m; ++i) {
      __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
      for (int p = 0; p < k; ++p) {
        __m256 av = _mm256_set1_ps(a_at(i, p));
        acc0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + size_t(p) * ldb + j), acc0);
        acc1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + size_t(p) * ldb + j + 8), acc1);
      }
      float* out = c + size_t(i) * ldc + j;
      __m256 valpha = _mm256_set1_ps(alpha);
      __m256 res0 = _mm256_mul_ps(valpha, acc0);
      __m256 res1 = _mm256_mul_ps(valpha, acc1);
      if (beta != 0.0f) {
        __m256 vbeta = _mm256_set1_ps(beta);
        res0 = _mm256_fmadd_ps(vbeta, _mm256_loadu_ps(out), res0);
        res1 = _mm256_fmadd_ps(vbeta, _mm256_loadu_ps(out + 8), res1);
      }
      _mm256_storeu_ps(out, res0);
      _mm256_storeu_ps(out + 8, res1);
    }
  }
  if (j < n) {
    for (int i = 0; i < m; ++i) {
      for (int jj = j; jj < n; ++jj) {
        float acc = 0.0f;
        for (int p = 0; p < k; ++p) acc += a_at(i, p) * b[size_t(p) * ldb + jj];
        float* out = &c[size_t(i) * ldc + jj];
        *out = alpha * acc + (beta == 0.0f ? 0.0f : beta * *out);
      }
    }
  }
}

// NT path: rows of A dotted with rows of B, both contiguous along k.
void gemm_nt(int m, int n, int k, float alpha, const float* a, int lda, const float* b,
             int ldb, float beta, float* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    const float* arow = a + size_t(i) * lda;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + size_t(j) * ldb;
      __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
      int p = 0;
      for (; p + 16 <= k; p += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p + 8), _mm256_loadu_ps(brow + p + 8), acc1);
      }
      for (; p + 8 <= k; p += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
      }
      float acc = hsum8(_mm256_add_ps(acc0, acc1));
      for (; p < k; ++p) acc += arow[p] * brow[p];
      float* out = &c[size_t(i) * ldc + j];
      *out = alpha * acc + (beta == 0.0f ? 0.0f : beta * *out);
    }
  }
}

void gemm_f32_avx2(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                   int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  if (!ta && !tb) {
    gemm_rowmajor_b(m, n, k, alpha, a, lda, 1, b, ldb, beta, c, ldc);
  } else if (ta && !tb) {
    gemm_rowmajor_b(m, n, k, alpha, a, 1, lda, b, ldb, beta, c, ldc);
  } else if (!ta && tb) {
    gemm_nt(m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
  } else {
    scalar_ops().gemm_f32(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
  }
}

void relu_f32_avx2(const float* x, float* y, size_t n) {
  __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_grad_f32_avx2(const float* x, const float* dy, float* dx, size_t n) {
  __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_f32_avx2(float* w, const float* g, float* m, float* v, size_t n, float lr,
                        float b1, float b2, float eps, float bc1, float bc2) {
  __m256 vb1 = _mm256_set1_ps(b1), vnb1 = _mm256_set1_ps(1.0f - b1);
  __m256 vb2 = _mm256_set1_ps(b2), vnb2 = _mm256_set1_ps(1.0f - b2);
  __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
  __m256 vbc1 = _mm256_set1_ps(bc1), vbc2 = _mm256_set1_ps(bc2);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gi = _mm256_loadu_ps(g + i);
    __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vnb1, gi));
    // ((1-b2)*g)*g matches the reference's association exactly
    __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                              _mm256_mul_ps(_mm256_mul_ps(vnb2, gi), gi));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    __m256 mhat = _mm256_mul_ps(mi, vbc1);
    __m256 vhat = _mm256_mul_ps(vi, vbc2);
    __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
    _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

void axpby_f32_avx2(float a, const float* x, float b, float* y, size_t n) {
  __m256 va = _mm256_set1_ps(a), vb = _mm256_set1_ps(b);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 res = _mm256_add_ps(_mm256_mul_ps(va, _mm256_loadu_ps(x + i)),
                               _mm256_mul_ps(vb, _mm256_loadu_ps(y + i)));
    _mm256_storeu_ps(y + i, res);
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_bias_f32_avx2(float* x, float s, float b, size_t n) {
  __m256 vs = _mm256_set1_ps(s), vb = _mm256_set1_ps(b);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_add_ps(_mm256_mul_ps(_mm256_loadu_ps(x + i), vs), vb));
  }
  for (; i < n; ++i) x[i] = x[i] * s + b;
}

double sum_f32_avx2(const float* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128 lo = _mm_loadu_ps(x + i);
    __m128 hi = _mm_loadu_ps(x + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(lo));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(hi));
  }
  double acc = hsum4d(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_f32_avx2(const float* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d lo = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    __m256d hi = _mm256_cvtps_pd(_mm_loadu_ps(x + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(lo, lo));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(hi, hi));
  }
  double acc = hsum4d(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += double(x[i]) * double(x[i]);
  return acc;
}

double sum_f64_avx2(const double* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum4d(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_f64_avx2(const double* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a = _mm256_loadu_pd(x + i);
    __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
  }
  double acc = hsum4d(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void cmul_f64_avx2(const std::complex<double>* a, const std::complex<double>* b,
                   std::complex<double>* out, size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    __m256d b_re = _mm256_movedup_pd(vb);
    __m256d b_im = _mm256_permute_pd(vb, 0xF);
    __m256d a_swap = _mm256_permute_pd(va, 0x5);
    __m256d res = _mm256_fmaddsub_pd(va, b_re, _mm256_mul_pd(a_swap, b_im));
    _mm256_storeu_pd(po + 2 * i, res);
  }
  for (; i < n; ++i) {
    double re = a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    double im = a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    out[i] = {re, im};
  }
}

void abs2_accum_f64_avx2(const std::complex<double>* z, double w, double* acc, size_t n) {
  const double* pz = reinterpret_cast<const double*>(z);
  __m256d vw = _mm256_set1_pd(w);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z0 = _mm256_loadu_pd(pz + 2 * i);      // r0 i0 r1 i1
    __m256d z1 = _mm256_loadu_pd(pz + 2 * i + 4);  // r2 i2 r3 i3
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(z0, z0), _mm256_mul_pd(z1, z1));
    // hadd interleaves 128-bit lanes: [|z0|^2 |z2|^2 |z1|^2 |z3|^2]
    __m256d mags = _mm256_permute4x64_pd(h, 0xD8);
    __m256d res = _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(vw, mags));
    _mm256_storeu_pd(acc + i, res);
  }
  for (; i < n; ++i) {
    acc[i] += w * (z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
  }
}

}  // namespace

const Ops* avx2_ops_table() {
  static const Ops table = {
      "avx2",
      gemm_f32_avx2,
      relu_f32_avx2,
      relu_grad_f32_avx2,
      adam_step_f32_avx2,
      axpby_f32_avx2,
      scale_bias_f32_avx2,
      sum_f32_avx2,
      sumsq_f32_avx2,
      sum_f64_avx2,
      sumsq_f64_avx2,
      cmul_f64_avx2,
      abs2_accum_f64_avx2,
  };
  return &table;
}

}  // namespace speckle::kernels

#endif  // __x86_64__
