#include "oedpm/projection.hpp"

#include <cmath>
#include <string>

#include "oedpm/kernels.hpp"

namespace oedpm {

std::size_t sample_subspace_dim(std::size_t p, Rng& rng) {
  if (p < 1) throw UsageError("sample_subspace_dim: p must be >= 1");
  const double pd = static_cast<double>(p);
  const double root = std::sqrt(pd);
  auto lower = static_cast<long long>(std::floor(std::min(pd, 2.0 + root / 2.0)));
  auto upper = static_cast<long long>(std::floor(std::min(pd, 2.0 + root)));
  if (lower < 1) lower = 1;
  if (lower > upper) lower = upper;
  return static_cast<std::size_t>(rng.uniform_int(lower, upper));
}

ProjectionMatrix generate_projection(std::size_t p, std::size_t d, Rng& rng,
                                     std::uint64_t seed_tag) {
  if (d < 1 || d > p)
    throw UsageError("generate_projection: need 1 <= d <= p, got d=" + std::to_string(d) +
                     ", p=" + std::to_string(p));

  const auto& k = kernels::active();
  // Row-major draw order, stored column-major for the projection dots.
  std::vector<double> cols(p * d);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < d; ++c)
      cols[c * p + r] = rng.uniform(-1.0, 1.0);

  constexpr double kMinNorm = 1e-12;
  constexpr int kMaxRedraws = 100;
  for (std::size_t c = 0; c < d; ++c) {
    double* v = cols.data() + c * p;
    int redraws = 0;
    for (;;) {
      // Modified Gram-Schmidt against the already-orthonormalized columns.
      for (std::size_t j = 0; j < c; ++j) {
        const double* q = cols.data() + j * p;
        k.axpy(-k.dot(v, q, p), q, v, p);
      }
      const double norm = std::sqrt(k.dot(v, v, p));
      if (norm >= kMinNorm) {
        const double inv = 1.0 / norm;
        for (std::size_t r = 0; r < p; ++r) v[r] *= inv;
        break;
      }
      if (++redraws > kMaxRedraws)
        throw NumericError("generate_projection: column " + std::to_string(c) +
                           " degenerate after " + std::to_string(kMaxRedraws) + " redraws");
      for (std::size_t r = 0; r < p; ++r) v[r] = rng.uniform(-1.0, 1.0);
    }
  }
  return ProjectionMatrix(p, d, std::move(cols), seed_tag);
}

Matrix project(const Matrix& data, const ProjectionMatrix& r) {
  check_same_cols(data, r.source_dim(), "project");
  Matrix out(data.rows(), r.target_dim());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double* row = data.row(i);
    double* dst = out.row(i);
    for (std::size_t c = 0; c < r.target_dim(); ++c)
      dst[c] = k.dot(row, r.column(c), r.source_dim());
  }
  return out;
}

void project_row(const double* row, const ProjectionMatrix& r, double* out) {
  const auto& k = kernels::active();
  for (std::size_t c = 0; c < r.target_dim(); ++c)
    out[c] = k.dot(row, r.column(c), r.source_dim());
}

} // namespace oedpm
