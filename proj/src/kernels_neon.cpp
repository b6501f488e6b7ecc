#include "oedpm/kernels.hpp"

#include <arm_neon.h>

// NEON variants, 2 doubles per lane (aarch64 float64x2).

namespace oedpm::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + j), vld1q_f64(b + j));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + j + 2), vld1q_f64(b + j + 2));
  }
  if (j + 2 <= n) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + j), vld1q_f64(b + j));
    j += 2;
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t vy = vld1q_f64(y + j);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + j));
    vst1q_f64(y + j, vy);
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

double quad_diag_neon(const double* x, const double* mean, const double* coef,
                      std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + j), vld1q_f64(mean + j));
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(coef + j), d), d);
  }
  double acc = vaddvq_f64(acc0);
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc += coef[j] * d * d;
  }
  return acc;
}

void accum_sq_diff_neon(const double* x, const double* mean, double w,
                        double* acc, std::size_t n) {
  const float64x2_t vw = vdupq_n_f64(w);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + j), vld1q_f64(mean + j));
    float64x2_t va = vld1q_f64(acc + j);
    va = vfmaq_f64(va, vmulq_f64(vw, d), d);
    vst1q_f64(acc + j, va);
  }
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

} // namespace

const Kernels& neon() {
  static const Kernels k = {"neon", dot_neon, axpy_neon, quad_diag_neon,
                            accum_sq_diff_neon};
  return k;
}

} // namespace oedpm::kernels
