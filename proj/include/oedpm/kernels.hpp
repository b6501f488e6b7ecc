#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace oedpm::kernels {

// Vectorizable inner loops of the pipeline. Every entry has a scalar
// reference implementation; architecture variants (AVX2, NEON) are selected
// once at startup and must agree with the reference within floating-point
// reassociation error (covered by the equivalence tests).
struct Kernels {
  const char* name;

  // sum_j a[j] * b[j]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[j] += alpha * x[j]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // sum_j coef[j] * (x[j] - mean[j])^2   (diagonal quadratic form)
  double (*quad_diag)(const double* x, const double* mean, const double* coef,
                      std::size_t n);

  // acc[j] += w * (x[j] - mean[j])^2   (weighted squared-deviation moment)
  void (*accum_sq_diff)(const double* x, const double* mean, double w,
                        double* acc, std::size_t n);
};

const Kernels& scalar();

#if defined(OEDPM_BUILD_AVX2)
const Kernels& avx2();
#endif
#if defined(OEDPM_BUILD_NEON)
const Kernels& neon();
#endif

// Active kernel set: best supported variant for the running CPU, overridable
// with OEDPM_KERNEL=scalar|avx2|neon. Resolved once, thread-safe.
const Kernels& active();

// Variant lookup by name; nullptr if that variant is not compiled in or not
// supported by the running CPU.
const Kernels* by_name(std::string_view name);

// Names of all variants usable on this machine (reference first).
std::vector<std::string_view> available();

} // namespace oedpm::kernels
