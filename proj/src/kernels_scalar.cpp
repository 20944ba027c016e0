#include <cmath>
#include <complex>
#include <cstddef>

#include "speckle/kernels.hpp"

namespace speckle::kernels {
namespace {

inline const float& elem(const float* a, int ld, bool trans, int r, int c) {
  return trans ? a[size_t(c) * ld + r] : a[size_t(r) * ld + c];
}

void gemm_f32_scalar(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                     int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int p = 0; p < k; ++p) acc += elem(a, lda, ta, i, p) * elem(b, ldb, tb, p, j);
      float* out = &c[size_t(i) * ldc + j];
      *out = alpha * acc + (beta == 0.0f ? 0.0f : beta * *out);
    }
  }
}

void relu_f32_scalar(const float* x, float* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_grad_f32_scalar(const float* x, const float* dy, float* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_f32_scalar(float* w, const float* g, float* m, float* v, size_t n, float lr,
                          float b1, float b2, float eps, float bc1, float bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    float mhat = m[i] * bc1;
    float vhat = v[i] * bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void axpby_f32_scalar(float a, const float* x, float b, float* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_bias_f32_scalar(float* x, float s, float b, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] = x[i] * s + b;
}

double sum_f32_scalar(const float* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_f32_scalar(const float* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += double(x[i]) * double(x[i]);
  return acc;
}

double sum_f64_scalar(const double* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_f64_scalar(const double* x, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void cmul_f64_scalar(const std::complex<double>* a, const std::complex<double>* b,
                     std::complex<double>* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double re = a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    double im = a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    out[i] = {re, im};
  }
}

void abs2_accum_f64_scalar(const std::complex<double>* z, double w, double* acc, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    acc[i] += w * (z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      gemm_f32_scalar,
      relu_f32_scalar,
      relu_grad_f32_scalar,
      adam_step_f32_scalar,
      axpby_f32_scalar,
      scale_bias_f32_scalar,
      sum_f32_scalar,
      sumsq_f32_scalar,
      sum_f64_scalar,
      sumsq_f64_scalar,
      cmul_f64_scalar,
      abs2_accum_f64_scalar,
  };
  return table;
}

void gemm_f64(bool ta, bool tb, int m, int n, int k, double alpha, const double* a, int lda,
              const double* b, int ldb, double beta, double* c, int ldc) {
  auto elem64 = [](const double* p, int ld, bool trans, int r, int cc) -> double {
    return trans ? p[size_t(cc) * ld + r] : p[size_t(r) * ld + cc];
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += elem64(a, lda, ta, i, p) * elem64(b, ldb, tb, p, j);
      double* out = &c[size_t(i) * ldc + j];
      *out = alpha * acc + (beta == 0.0 ? 0.0 : beta * *out);
    }
  }
}

}  // namespace speckle::kernels
