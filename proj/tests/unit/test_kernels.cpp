#include <doctest.h>

#include <cmath>
#include <vector>

#include "oedpm/kernels.hpp"
#include "oedpm/rng.hpp"

using oedpm::Rng;
namespace kernels = oedpm::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Reassociation-tolerant comparison: FMA variants may differ from the
// reference by a few ulps per accumulated term.
void check_close(double got, double want, double magnitude) {
  CHECK(std::abs(got - want) <= 1e-12 * (magnitude + 1.0));
}

} // namespace

TEST_CASE("simd variants agree with the scalar reference") {
  const auto names = kernels::available();
  CHECK(!names.empty());
  const auto& ref = kernels::scalar();

  Rng rng(417);
  for (const auto name : names) {
    const kernels::Kernels* k = kernels::by_name(name);
    REQUIRE(k != nullptr);
    CAPTURE(name);

    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{3},
                          std::size_t{4}, std::size_t{5}, std::size_t{7}, std::size_t{8},
                          std::size_t{9}, std::size_t{13}, std::size_t{16}, std::size_t{31},
                          std::size_t{64}, std::size_t{67}, std::size_t{1000}}) {
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      const auto c = random_vec(rng, n, 0.1, 2.0);

      double mag = 0.0;
      for (std::size_t j = 0; j < n; ++j) mag += std::abs(a[j] * b[j]);
      check_close(k->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), mag);

      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      k->axpy(1.7, a.data(), y1.data(), n);
      ref.axpy(1.7, a.data(), y2.data(), n);
      for (std::size_t j = 0; j < n; ++j) check_close(y1[j], y2[j], std::abs(y2[j]));

      mag = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = a[j] - b[j];
        mag += std::abs(c[j] * d * d);
      }
      check_close(k->quad_diag(a.data(), b.data(), c.data(), n),
                  ref.quad_diag(a.data(), b.data(), c.data(), n), mag);

      auto acc1 = random_vec(rng, n, 0.0, 1.0);
      auto acc2 = acc1;
      k->accum_sq_diff(a.data(), b.data(), 0.37, acc1.data(), n);
      ref.accum_sq_diff(a.data(), b.data(), 0.37, acc2.data(), n);
      for (std::size_t j = 0; j < n; ++j) check_close(acc1[j], acc2[j], std::abs(acc2[j]));
    }
  }
}

TEST_CASE("scalar kernel reference values") {
  const auto& k = kernels::scalar();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(k.dot(a, b, 3) == doctest::Approx(32.0));

  double y[] = {1.0, 1.0, 1.0};
  k.axpy(2.0, a, y, 3);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[2] == doctest::Approx(7.0));

  const double mean[] = {0.0, 1.0, 2.0};
  const double coef[] = {1.0, 2.0, 0.5};
  // 1*1 + 2*1 + 0.5*1 = 3.5
  CHECK(k.quad_diag(a, mean, coef, 3) == doctest::Approx(3.5));

  double acc[] = {0.0, 0.0, 0.0};
  k.accum_sq_diff(a, mean, 2.0, acc, 3);
  CHECK(acc[0] == doctest::Approx(2.0));
  CHECK(acc[1] == doctest::Approx(2.0));
  CHECK(acc[2] == doctest::Approx(2.0));
}

TEST_CASE("active kernel dispatch is stable") {
  const auto& first = kernels::active();
  const auto& second = kernels::active();
  CHECK(&first == &second);
  CHECK(kernels::by_name("scalar") == &kernels::scalar());
  CHECK(kernels::by_name("no-such-variant") == nullptr);
}
