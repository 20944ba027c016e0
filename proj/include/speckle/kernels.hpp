#pragma once

#include <complex>
#include <cstddef>

namespace speckle::kernels {

// Arithmetic inner loops used by the network and the optics pipeline. Every
// entry has a scalar reference implementation and (on x86-64) an AVX2+FMA
// variant; the active table is picked once at startup from CPUID, overridable
// with SPECKLE_KERNELS=scalar|avx2. Scalar and SIMD variants are equivalence
// tested against each other.
//
// gemm computes C = alpha * op(A) * op(B) + beta * C, row major.
// op(A) is m x k, op(B) is k x n, C is m x n.
struct Ops {
  const char* name;

  void (*gemm_f32)(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                   const float* a, int lda, const float* b, int ldb, float beta,
                   float* c, int ldc);
  void (*relu_f32)(const float* x, float* y, size_t n);
  // dx = dy where x > 0 else 0
  void (*relu_grad_f32)(const float* x, const float* dy, float* dx, size_t n);
  // Adam with precomputed bias corrections bc1 = 1/(1-b1^t), bc2 = 1/(1-b2^t)
  void (*adam_step_f32)(float* w, const float* g, float* m, float* v, size_t n,
                        float lr, float b1, float b2, float eps, float bc1, float bc2);
  // y = a*x + b*y
  void (*axpby_f32)(float a, const float* x, float b, float* y, size_t n);
  // x = x*s + b
  void (*scale_bias_f32)(float* x, float s, float b, size_t n);
  // reductions accumulate in double in both variants
  double (*sum_f32)(const float* x, size_t n);
  double (*sumsq_f32)(const float* x, size_t n);
  double (*sum_f64)(const double* x, size_t n);
  double (*sumsq_f64)(const double* x, size_t n);
  // out = a * b (elementwise complex); out may alias a
  void (*cmul_f64)(const std::complex<double>* a, const std::complex<double>* b,
                   std::complex<double>* out, size_t n);
  // acc += w * |z|^2
  void (*abs2_accum_f64)(const std::complex<double>* z, double w, double* acc, size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr if unsupported on this CPU
const Ops& active();

// Front-end used by the hot paths: dispatches to the active table and, for
// large problems, splits the output across the worker pool (each element is
// still produced by exactly one accumulation chain, so results are
// scheduling independent).
void gemm_f32(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
              const float* a, int lda, const float* b, int ldb, float beta,
              float* c, int ldc);

// Reference-precision gemm for double (used by the double-precision network
// instantiation that backs the finite-difference gradient oracle).
void gemm_f64(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
              const double* a, int lda, const double* b, int ldb, double beta,
              double* c, int ldc);

template <typename T>
void gemm(bool ta, bool tb, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc);

template <>
inline void gemm<float>(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                        int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  gemm_f32(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <>
inline void gemm<double>(bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
                         int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  gemm_f64(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace speckle::kernels
