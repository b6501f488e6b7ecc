#include "oedpm/kernels.hpp"

#include <immintrin.h>

// AVX2 + FMA variants, 4 doubles per lane with two accumulators to hide FMA
// latency. Only reached after the dispatcher has confirmed CPU support.

namespace oedpm::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), acc1);
  }
  if (j + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    j += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vy = _mm256_loadu_pd(y + j);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), vy);
    _mm256_storeu_pd(y + j, vy);
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

double quad_diag_avx2(const double* x, const double* mean, const double* coef,
                      std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(mean + j));
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(coef + j), d), d, acc0);
  }
  double acc = hsum(acc0);
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc += coef[j] * d * d;
  }
  return acc;
}

void accum_sq_diff_avx2(const double* x, const double* mean, double w,
                        double* acc, std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(mean + j));
    __m256d va = _mm256_loadu_pd(acc + j);
    va = _mm256_fmadd_pd(_mm256_mul_pd(vw, d), d, va);
    _mm256_storeu_pd(acc + j, va);
  }
  for (; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

} // namespace

const Kernels& avx2() {
  static const Kernels k = {"avx2", dot_avx2, axpy_avx2, quad_diag_avx2,
                            accum_sq_diff_avx2};
  return k;
}

} // namespace oedpm::kernels
