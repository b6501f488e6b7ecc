#include "oedpm/kernels.hpp"

// Reference kernels. Plain loops, no pragmas: these define the semantics the
// SIMD variants are tested against.

namespace oedpm::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

double quad_diag_scalar(const double* x, const double* mean, const double* coef,
                        std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc += coef[j] * d * d;
  }
  return acc;
}

void accum_sq_diff_scalar(const double* x, const double* mean, double w,
                          double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - mean[j];
    acc[j] += w * d * d;
  }
}

} // namespace

const Kernels& scalar() {
  static const Kernels k = {"scalar", dot_scalar, axpy_scalar, quad_diag_scalar,
                            accum_sq_diff_scalar};
  return k;
}

} // namespace oedpm::kernels
