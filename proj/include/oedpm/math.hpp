#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oedpm/errors.hpp"
#include "oedpm/matrix.hpp"

namespace oedpm {

// Digamma psi(x) for x > 0. Upward recurrence shifts the argument above 6,
// then an asymptotic expansion in 1/x^2; absolute error <= 1e-10 over
// [1e-6, 1e6]. Throws UsageError for x <= 0.
double digamma(double x);

// log(sum_j exp(v_j)) via the max-shift trick. Throws UsageError when empty.
double log_sum_exp(std::span<const double> values);

// log of the d-dimensional Gaussian density with diagonal covariance.
// var must be strictly positive entrywise.
double gaussian_log_density_diag(std::span<const double> x,
                                 std::span<const double> mean,
                                 std::span<const double> var);

// log of the d-dimensional Gaussian density with full covariance, evaluated
// through a Cholesky factorization of cov. Throws NumericError (naming the
// failing pivot) when cov is not positive definite.
double gaussian_log_density_full(std::span<const double> x,
                                 std::span<const double> mean,
                                 const Matrix& cov);

// Order statistic with linear interpolation on h = (n-1)*q (the "type 7"
// convention). values need not be sorted. Throws UsageError when empty or
// q outside [0, 1].
double quantile(std::span<const double> values, double q);

// In-place lower Cholesky factorization of a symmetric matrix held in `a`
// (full storage; only the lower triangle is read). Throws NumericError with
// the failing pivot index when a is not positive definite.
class Cholesky {
public:
  explicit Cholesky(const Matrix& a);

  // Solves L z = b (forward substitution).
  void forward_solve(std::span<const double> b, std::span<double> z) const;

  // b^T A^{-1} b for the factored A.
  double inv_quad_form(std::span<const double> b) const;

  // log |A|
  double log_det() const;

  // A^{-1}, symmetric.
  Matrix inverse() const;

  std::size_t dim() const { return n_; }

private:
  std::size_t n_;
  Matrix l_;
};

// log of the multivariate gamma function, log Gamma_d(a).
double log_multigamma(double a, std::size_t d);

} // namespace oedpm
