#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace test_oracles {

// Digamma in long double: recurrence up to x >= 20, then the asymptotic
// series through the x^{-14} Bernoulli term. Good to well under 1e-13 in
// double precision.
inline long double digamma_reference(long double x) {
  long double result = 0.0L;
  while (x < 20.0L) {
    result -= 1.0L / x;
    x += 1.0L;
  }
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  result += std::log(x) - 0.5L * inv;
  // -sum B_2k / (2k x^2k), k = 1..7
  static const std::array<long double, 7> coeffs = {
      1.0L / 12.0L,  -1.0L / 120.0L, 1.0L / 252.0L,   -1.0L / 240.0L,
      1.0L / 132.0L, -691.0L / 32760.0L, 1.0L / 12.0L};
  long double power = inv2;
  for (const long double c : coeffs) {
    result -= c * power;
    power *= inv2;
  }
  return result;
}

// Quantile by explicit sort + linear interpolation on (n-1)q.
inline double quantile_reference(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

// Plain two-component univariate EM with responsibilities, maximum
// likelihood (no priors). Initialized from a median split.
struct EmOracleResult {
  double mean1 = 0.0, mean2 = 0.0;
  double var1 = 1.0, var2 = 1.0;
  double weight1 = 0.5;
  std::vector<int> assignments; // 0 or 1, aligned with input order
};

inline EmOracleResult em_two_component(const std::vector<double>& x, int iters = 300) {
  const std::size_t n = x.size();
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double split = sorted[n / 2];

  EmOracleResult r;
  {
    double s1 = 0.0, s2 = 0.0;
    std::size_t n1 = 0, n2 = 0;
    for (double v : x) {
      if (v <= split) { s1 += v; ++n1; } else { s2 += v; ++n2; }
    }
    if (n1 == 0 || n2 == 0) { // degenerate split, seed from extremes
      r.mean1 = sorted.front();
      r.mean2 = sorted.back();
    } else {
      r.mean1 = s1 / static_cast<double>(n1);
      r.mean2 = s2 / static_cast<double>(n2);
    }
  }

  std::vector<double> resp(n);
  for (int it = 0; it < iters; ++it) {
    // E step
    for (std::size_t i = 0; i < n; ++i) {
      const double d1 = x[i] - r.mean1;
      const double d2 = x[i] - r.mean2;
      const double l1 = std::log(r.weight1) - 0.5 * std::log(r.var1) - 0.5 * d1 * d1 / r.var1;
      const double l2 =
          std::log(1.0 - r.weight1) - 0.5 * std::log(r.var2) - 0.5 * d2 * d2 / r.var2;
      const double m = std::max(l1, l2);
      const double e1 = std::exp(l1 - m);
      const double e2 = std::exp(l2 - m);
      resp[i] = e1 / (e1 + e2);
    }
    // M step
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w += resp[i];
      m1 += resp[i] * x[i];
      m2 += (1.0 - resp[i]) * x[i];
    }
    const double w2 = static_cast<double>(n) - w;
    r.mean1 = m1 / w;
    r.mean2 = m2 / w2;
    double v1 = 0.0, v2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d1 = x[i] - r.mean1;
      const double d2 = x[i] - r.mean2;
      v1 += resp[i] * d1 * d1;
      v2 += (1.0 - resp[i]) * d2 * d2;
    }
    r.var1 = std::max(v1 / w, 1e-8);
    r.var2 = std::max(v2 / w2, 1e-8);
    r.weight1 = w / static_cast<double>(n);
  }

  r.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.assignments[i] = resp[i] >= 0.5 ? 0 : 1;
  return r;
}

} // namespace test_oracles
