#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oedpm/dpgm.hpp"
#include "oedpm/matrix.hpp"
#include "oedpm/projection.hpp"

namespace oedpm {

enum class ThresholdMode { kQuantile, kIqr };

struct EnsembleConfig {
  int ensemble_size = 100;                       // M
  std::optional<double> contamination = 0.1;     // phi, quantile mode only
  ThresholdMode threshold_mode = ThresholdMode::kQuantile;
  dpgm::CovarianceMode covariance_mode = dpgm::CovarianceMode::kDiagonal;
  int truncation = 30;                           // K
  std::uint64_t master_seed = 0;

  void validate() const;
};

// A fitted mixture after inlier-component pruning: the retained component
// index set with weights renormalized to sum 1.
struct PrunedMixture {
  dpgm::CovarianceMode mode = dpgm::CovarianceMode::kDiagonal;
  std::vector<int> retained;       // indices into the original truncation
  Vector weights;                  // renormalized, aligned with `retained`
  Matrix means;                    // |retained| x d
  Matrix cov_diag;                 // |retained| x d (diagonal mode)
  std::vector<Matrix> cov_full;    // |retained| of d x d (full mode)

  std::size_t size() const { return retained.size(); }
  std::size_t dim() const { return means.cols(); }
};

struct EnsembleComponent {
  ProjectionMatrix projection;
  std::vector<std::size_t> subsample_indices;
  PrunedMixture mixture;
  double threshold = 0.0;          // T_m, log-likelihood units
  std::uint64_t component_seed = 0;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct DetectionReport {
  std::vector<double> scores;      // O_i in [0,1], an exact multiple of 1/M
  std::vector<int> memberships;    // I_i = 1{O_i > 1/2}
  std::vector<double> thresholds;  // T_m per component
  EnsembleConfig config;
  std::optional<Metrics> metrics;
};

// Uniform integer in [min(N,50), min(N,1000)].
std::size_t sample_subsample_size(std::size_t n_total, Rng& rng);

// Retained set {k : weight_k >= 1/active_count} with the argmax always kept;
// weights renormalized over the survivors.
struct PruneResult {
  std::vector<int> retained;
  Vector weights;
};
PruneResult prune_components(const dpgm::MixtureEstimate& estimate);

// log of the pruned-mixture density at x (dimension d_m).
double component_log_density(std::span<const double> x, const EnsembleComponent& component);

// Log densities of the component's own training subsample; the threshold is
// derived from these.
std::vector<double> training_log_densities(const EnsembleComponent& component,
                                           const Matrix& train);

double threshold_from(std::span<const double> log_densities, ThresholdMode mode,
                      std::optional<double> contamination);

// One ensemble member: subspace + subsample + DPGM fit + pruning + threshold.
// Deterministic given (config.master_seed, index).
EnsembleComponent build_component(const Matrix& train, const EnsembleConfig& config,
                                  std::size_t index);

// All M components, order by index regardless of worker scheduling.
std::vector<EnsembleComponent> fit_detector(const Matrix& train, const EnsembleConfig& config);

// Votes, scores and memberships for the test matrix.
DetectionReport score(const Matrix& test, const std::vector<EnsembleComponent>& components,
                      const EnsembleConfig& config);

// Replaces every component threshold using the given rule (fits are
// unaffected; used by the contamination sweep).
void recompute_thresholds(std::vector<EnsembleComponent>& components, const Matrix& train,
                          ThresholdMode mode, std::optional<double> contamination);

} // namespace oedpm
