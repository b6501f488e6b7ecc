#include "oedpm/math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oedpm/kernels.hpp"

namespace oedpm {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kLogPi = 1.1447298858494001741434273513531;
} // namespace

double digamma(double x) {
  if (!(x > 0.0))
    throw UsageError("digamma: argument must be positive, got " + std::to_string(x));

  // psi(x) = psi(x+1) - 1/x until the asymptotic region. Extended precision
  // keeps the absolute error within 1e-10 even where |psi| reaches 1e6 and a
  // single double rounding would already cost ~1.2e-10.
  long double z = x;
  long double result = 0.0L;
  while (z < 6.0L) {
    result -= 1.0L / z;
    z += 1.0L;
  }

  // Asymptotic series: log z - 1/(2z) - sum B_2k / (2k z^2k).
  const long double inv = 1.0L / z;
  const long double inv2 = inv * inv;
  result += std::log(z) - 0.5L * inv;
  result -= inv2 * (1.0L / 12.0L -
            inv2 * (1.0L / 120.0L -
            inv2 * (1.0L / 252.0L -
            inv2 * (1.0L / 240.0L -
            inv2 * (1.0L / 132.0L)))));
  return static_cast<double>(result);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw UsageError("log_sum_exp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m; // all -inf stays -inf
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

double gaussian_log_density_diag(std::span<const double> x,
                                 std::span<const double> mean,
                                 std::span<const double> var) {
  const std::size_t d = x.size();
  if (mean.size() != d || var.size() != d)
    throw UsageError("gaussian_log_density_diag: dimension mismatch");
  double log_det = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (!(var[j] > 0.0))
      throw NumericError("gaussian_log_density_diag: non-positive variance at coordinate " +
                         std::to_string(j));
    log_det += std::log(var[j]);
  }
  std::vector<double> inv_var(d);
  for (std::size_t j = 0; j < d; ++j) inv_var[j] = 1.0 / var[j];
  const double quad = kernels::active().quad_diag(x.data(), mean.data(), inv_var.data(), d);
  return -0.5 * (static_cast<double>(d) * kLogTwoPi + log_det + quad);
}

double gaussian_log_density_full(std::span<const double> x,
                                 std::span<const double> mean,
                                 const Matrix& cov) {
  const std::size_t d = x.size();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw UsageError("gaussian_log_density_full: dimension mismatch");
  Cholesky chol(cov);
  std::vector<double> diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - mean[j];
  const double quad = chol.inv_quad_form(diff);
  return -0.5 * (static_cast<double>(d) * kLogTwoPi + chol.log_det() + quad);
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw UsageError("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0))
    throw UsageError("quantile: q must lie in [0, 1], got " + std::to_string(q));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Cholesky::Cholesky(const Matrix& a) : n_(a.rows()), l_(a.rows(), a.rows()) {
  if (a.rows() != a.cols()) throw UsageError("Cholesky: matrix must be square");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j) - kernels::active().dot(l_.row(i), l_.row(j), j);
      if (i == j) {
        if (!(s > 0.0))
          throw NumericError("Cholesky: matrix not positive definite at pivot " +
                             std::to_string(i));
        l_(i, i) = std::sqrt(s);
      } else {
        l_(i, j) = s / l_(j, j);
      }
    }
  }
}

void Cholesky::forward_solve(std::span<const double> b, std::span<double> z) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i] - kernels::active().dot(l_.row(i), z.data(), i);
    z[i] = s / l_(i, i);
  }
}

double Cholesky::inv_quad_form(std::span<const double> b) const {
  std::vector<double> z(n_);
  forward_solve(b, z);
  return kernels::active().dot(z.data(), z.data(), n_);
}

double Cholesky::log_det() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += std::log(l_(i, i));
  return 2.0 * acc;
}

Matrix Cholesky::inverse() const {
  // Columns of A^{-1} by solving L L^T x = e_i.
  Matrix inv(n_, n_);
  std::vector<double> e(n_), z(n_), x(n_);
  for (std::size_t c = 0; c < n_; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    e[c] = 1.0;
    forward_solve(e, z);
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = z[ii];
      for (std::size_t jj = ii + 1; jj < n_; ++jj) s -= l_(jj, ii) * x[jj];
      x[ii] = s / l_(ii, ii);
    }
    for (std::size_t r = 0; r < n_; ++r) inv(r, c) = x[r];
  }
  return inv;
}

double log_multigamma(double a, std::size_t d) {
  double acc = static_cast<double>(d) * static_cast<double>(d - 1) / 4.0 * kLogPi;
  for (std::size_t j = 1; j <= d; ++j)
    acc += std::lgamma(a + (1.0 - static_cast<double>(j)) / 2.0);
  return acc;
}

} // namespace oedpm
