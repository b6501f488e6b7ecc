#pragma once

#include <cstdint>
#include <vector>

#include "oedpm/matrix.hpp"
#include "oedpm/rng.hpp"

namespace oedpm {

// Orthonormal random projection R in R^{p x d}. Columns are stored
// contiguously (column-major) so projection reduces to length-p dots.
class ProjectionMatrix {
public:
  ProjectionMatrix(std::size_t source_dim, std::size_t target_dim,
                   std::vector<double> columns, std::uint64_t seed)
      : source_dim_(source_dim), target_dim_(target_dim), seed_(seed),
        columns_(std::move(columns)) {}

  std::size_t source_dim() const { return source_dim_; }
  std::size_t target_dim() const { return target_dim_; }
  std::uint64_t seed() const { return seed_; }

  const double* column(std::size_t c) const { return columns_.data() + c * source_dim_; }
  double entry(std::size_t r, std::size_t c) const { return columns_[c * source_dim_ + r]; }

private:
  std::size_t source_dim_;
  std::size_t target_dim_;
  std::uint64_t seed_;
  std::vector<double> columns_;
};

// Random subspace dimension: uniform integer in [L, U] with
// L = floor(min(p, 2 + sqrt(p)/2)) and U = floor(min(p, 2 + sqrt(p))),
// L clamped to >= 1 and to <= U. No reduction happens for p <= 2.
std::size_t sample_subspace_dim(std::size_t p, Rng& rng);

// p x d matrix of iid Uniform(-1,1) entries (row-major draw order), columns
// orthonormalized by modified Gram-Schmidt. A column collapsing below norm
// 1e-12 is redrawn from the stream, at most 100 times.
ProjectionMatrix generate_projection(std::size_t p, std::size_t d, Rng& rng,
                                     std::uint64_t seed_tag = 0);

// data (n x p) times R (p x d) -> n x d.
Matrix project(const Matrix& data, const ProjectionMatrix& r);

// Single row through R.
void project_row(const double* row, const ProjectionMatrix& r, double* out);

} // namespace oedpm
