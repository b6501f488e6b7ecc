#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "oedpm/kernels.hpp"
#include "oedpm/projection.hpp"

using oedpm::Matrix;
using oedpm::ProjectionMatrix;
using oedpm::Rng;

namespace {

double max_gram_deviation(const ProjectionMatrix& r) {
  const auto& k = oedpm::kernels::active();
  double worst = 0.0;
  for (std::size_t a = 0; a < r.target_dim(); ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      const double g = k.dot(r.column(a), r.column(b), r.source_dim());
      worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

} // namespace

TEST_CASE("subspace dimension bounds") {
  Rng rng(1);
  CHECK(oedpm::sample_subspace_dim(1, rng) == 1);
  CHECK(oedpm::sample_subspace_dim(2, rng) == 2);

  // p=9: L=floor(3.5)=3, U=floor(5)=5
  std::set<std::size_t> seen9;
  for (int i = 0; i < 500; ++i) seen9.insert(oedpm::sample_subspace_dim(9, rng));
  CHECK(*seen9.begin() >= 3);
  CHECK(*seen9.rbegin() <= 5);
  CHECK(seen9.size() == 3);

  // p=400: L=12, U=22 (Speech-sized)
  std::set<std::size_t> seen400;
  for (int i = 0; i < 2000; ++i) seen400.insert(oedpm::sample_subspace_dim(400, rng));
  CHECK(*seen400.begin() >= 12);
  CHECK(*seen400.rbegin() <= 22);

  CHECK_THROWS_AS(oedpm::sample_subspace_dim(0, rng), oedpm::UsageError);
}

TEST_CASE("subspace dimension respects bounds for every p up to 500") {
  Rng rng(2);
  for (std::size_t p = 1; p <= 500; ++p) {
    const double root = std::sqrt(static_cast<double>(p));
    auto lower = static_cast<long long>(std::floor(std::min<double>(p, 2.0 + root / 2.0)));
    auto upper = static_cast<long long>(std::floor(std::min<double>(p, 2.0 + root)));
    if (lower < 1) lower = 1;
    if (lower > upper) lower = upper;
    for (int rep = 0; rep < 20; ++rep) {
      const auto d = static_cast<long long>(oedpm::sample_subspace_dim(p, rng));
      CHECK(d >= lower);
      CHECK(d <= upper);
    }
    if (p <= 2) CHECK(oedpm::sample_subspace_dim(p, rng) == p);
  }
}

TEST_CASE("projection matrices are orthonormal and deterministic") {
  for (std::uint64_t seed : {1ULL, 2ULL, 77ULL, 90001ULL}) {
    Rng rng(seed);
    const auto r = oedpm::generate_projection(5, 3, rng, seed);
    CHECK(max_gram_deviation(r) <= 1e-10);
  }

  Rng square_rng(5);
  const auto square = oedpm::generate_projection(4, 4, square_rng, 5);
  CHECK(max_gram_deviation(square) <= 1e-10);

  Rng a(123), b(123);
  const auto ra = oedpm::generate_projection(20, 6, a, 123);
  const auto rb = oedpm::generate_projection(20, 6, b, 123);
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t row = 0; row < 20; ++row)
      CHECK(ra.entry(row, c) == rb.entry(row, c)); // bit-for-bit

  Rng bad(1);
  CHECK_THROWS_AS(oedpm::generate_projection(3, 4, bad), oedpm::UsageError);
}

TEST_CASE("distinct seeds give distinct matrices") {
  int collisions = 0;
  for (std::uint64_t pair = 0; pair < 100; ++pair) {
    Rng a(2 * pair), b(2 * pair + 1);
    const auto ra = oedpm::generate_projection(10, 4, a);
    const auto rb = oedpm::generate_projection(10, 4, b);
    bool same = true;
    for (std::size_t c = 0; c < 4 && same; ++c)
      for (std::size_t row = 0; row < 10 && same; ++row)
        same = ra.entry(row, c) == rb.entry(row, c);
    collisions += same ? 1 : 0;
  }
  CHECK(collisions == 0);
}

TEST_CASE("projection is the plain matrix product") {
  // Identity projection: output equals input.
  {
    Rng rng(31);
    const auto r = oedpm::generate_projection(3, 3, rng);
    Matrix data(2, 3);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) data(i, j) = rng.uniform(-2.0, 2.0);
    const Matrix out = oedpm::project(data, r);
    // R is orthogonal, so projecting twice through R R^T recovers the row norms.
    for (std::size_t i = 0; i < 2; ++i) {
      double in_norm = 0.0, out_norm = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        in_norm += data(i, j) * data(i, j);
        out_norm += out(i, j) * out(i, j);
      }
      CHECK(out_norm == doctest::Approx(in_norm).epsilon(1e-10));
    }
  }

  // Single row onto one dimension is the inner product.
  {
    Rng rng(32);
    const auto r = oedpm::generate_projection(6, 1, rng);
    Matrix data(1, 6);
    double want = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      data(0, j) = rng.uniform(-1.0, 1.0);
      want += data(0, j) * r.entry(j, 0);
    }
    const Matrix out = oedpm::project(data, r);
    CHECK(out(0, 0) == doctest::Approx(want).epsilon(1e-12));
  }

  Rng rng(33);
  const auto r = oedpm::generate_projection(4, 2, rng);
  Matrix wrong(1, 5);
  CHECK_THROWS_AS(oedpm::project(wrong, r), oedpm::UsageError);
}

TEST_CASE("orthonormal projection is non-expansive") {
  Rng rng(41);
  const auto r = oedpm::generate_projection(30, 7, rng);
  for (int rep = 0; rep < 1000; ++rep) {
    Matrix x(1, 30);
    double norm_in = 0.0;
    for (std::size_t j = 0; j < 30; ++j) {
      x(0, j) = rng.uniform(-10.0, 10.0);
      norm_in += x(0, j) * x(0, j);
    }
    const Matrix y = oedpm::project(x, r);
    double norm_out = 0.0;
    for (std::size_t j = 0; j < 7; ++j) norm_out += y(0, j) * y(0, j);
    CHECK(std::sqrt(norm_out) <= std::sqrt(norm_in) + 1e-10);
  }
}
