#pragma once

#include <optional>
#include <vector>

#include "oedpm/matrix.hpp"
#include "oedpm/rng.hpp"

namespace oedpm::dpgm {

enum class CovarianceMode { kDiagonal, kFull };

// Prior constants of one truncated DP Gaussian mixture fit. The empirical
// defaults put the prior mean/scale at the sample mean/covariance of the
// data the mixture is fitted on.
struct Hyperparams {
  double alpha = 1.0;              // DP concentration
  Vector xi;                       // prior mean, size d
  double b = 1.0;                  // prior mean precision scale
  double nu = 0.0;                 // Wishart degrees of freedom, >= d
  Matrix psi_full;                 // d x d prior scale (full mode)
  Vector psi_diag;                 // size-d prior scale diagonal (diagonal mode)
  int truncation = 30;             // K
  CovarianceMode mode = CovarianceMode::kDiagonal;

  std::size_t dim() const { return xi.size(); }
  void validate() const;
};

// alpha=1, b=1, nu=d, xi = sample mean, psi = sample covariance (population
// normalization); zero-variance diagonal entries are replaced by 1e-6.
Hyperparams empirical_hyperparams(const Matrix& data, int truncation, CovarianceMode mode);

// All variational parameters of one mixture fit.
struct VariationalState {
  CovarianceMode mode = CovarianceMode::kDiagonal;
  Matrix resp;          // n x K responsibilities, rows on the simplex
  Vector gamma1;        // K beta parameters
  Vector gamma2;
  Matrix xi_tilde;      // K x d posterior means
  Vector b_tilde;       // K
  Vector nu_tilde;      // K
  std::vector<Matrix> psi_full;  // K of d x d (full mode)
  Matrix psi_diag;               // K x d (diagonal mode)

  int iterations = 0;
  bool converged = false;
  std::vector<double> elbo_history;

  std::size_t n() const { return resp.rows(); }
  std::size_t k() const { return resp.cols(); }
  std::size_t dim() const { return xi_tilde.cols(); }
};

// Point estimates extracted from a converged state.
struct MixtureEstimate {
  CovarianceMode mode = CovarianceMode::kDiagonal;
  Vector weights;                // K, each in (0,1), sum <= 1
  Matrix means;                  // K x d
  std::vector<Matrix> cov_full;  // K of d x d (full mode)
  Matrix cov_diag;               // K x d (diagonal mode)
  std::vector<int> assignments;  // n hard assignments (0-based)
  int active_count = 0;          // number of components with >= 1 assignment
};

// Seeded random initialization: each instance is hard-assigned to the
// nearest of K randomly drawn data anchors, symmetric Dirichlet(1) jitter is
// added and rows are renormalized; the stick-breaking and NIW blocks are
// then refreshed from those responsibilities.
VariationalState init_state(const Matrix& data, const Hyperparams& hyper, Rng& rng);

// One coordinate update of each variational block.
void update_responsibilities(VariationalState& state, const Matrix& data,
                             const Hyperparams& hyper);
void update_stick_breaking(VariationalState& state, const Hyperparams& hyper);
void update_niw(VariationalState& state, const Matrix& data, const Hyperparams& hyper);

// Mean-field evidence lower bound of the current state.
double compute_elbo(const VariationalState& state, const Matrix& data,
                    const Hyperparams& hyper);

MixtureEstimate point_estimates(const VariationalState& state, const Matrix& data);

struct FitResult {
  VariationalState state;
  MixtureEstimate estimate;
};

// Coordinate ascent until the relative ELBO change drops below tol or
// max_iter sweeps elapse (non-convergence is flagged, not an error). The
// defaults leave room for the slow phase where the stick-breaking prior
// drains redundant overlapping components; looser tolerances halt inside
// that phase and leave spurious components alive.
FitResult fit(const Matrix& data, const Hyperparams& hyper, Rng& rng,
              int max_iter = 500, double tol = 1e-6);

} // namespace oedpm::dpgm
