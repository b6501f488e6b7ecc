#include "oedpm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "oedpm/math.hpp"
#include "oedpm/threading.hpp"

namespace oedpm {

void EnsembleConfig::validate() const {
  if (ensemble_size < 1) throw ConfigError("ensemble size must be >= 1");
  if (truncation < 1) throw ConfigError("truncation must be >= 1");
  if (contamination && !(*contamination > 0.0 && *contamination < 1.0))
    throw ConfigError("contamination must lie in (0, 1), got " +
                      std::to_string(*contamination));
  if (threshold_mode == ThresholdMode::kQuantile && !contamination)
    throw ConfigError("quantile thresholding requires a contamination value");
}

std::size_t sample_subsample_size(std::size_t n_total, Rng& rng) {
  if (n_total < 1) throw UsageError("sample_subsample_size: N must be >= 1");
  const std::size_t lo = std::min<std::size_t>(n_total, 50);
  const std::size_t hi = std::min<std::size_t>(n_total, 1000);
  return static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

PruneResult prune_components(const dpgm::MixtureEstimate& estimate) {
  const std::size_t K = estimate.weights.size();
  if (estimate.active_count < 1)
    throw UsageError("prune_components: estimate has no active components");

  const double cutoff = 1.0 / static_cast<double>(estimate.active_count);
  std::size_t argmax = 0;
  for (std::size_t k = 1; k < K; ++k)
    if (estimate.weights[k] > estimate.weights[argmax]) argmax = k;

  PruneResult result;
  for (std::size_t k = 0; k < K; ++k)
    if (estimate.weights[k] >= cutoff || k == argmax)
      result.retained.push_back(static_cast<int>(k));

  double total = 0.0;
  for (int k : result.retained) total += estimate.weights[static_cast<std::size_t>(k)];
  result.weights.reserve(result.retained.size());
  for (int k : result.retained)
    result.weights.push_back(estimate.weights[static_cast<std::size_t>(k)] / total);
  return result;
}

namespace {

PrunedMixture make_pruned(const dpgm::MixtureEstimate& estimate) {
  PruneResult pruned = prune_components(estimate);
  const std::size_t d = estimate.means.cols();

  PrunedMixture mix;
  mix.mode = estimate.mode;
  mix.retained = std::move(pruned.retained);
  mix.weights = std::move(pruned.weights);
  mix.means = Matrix(mix.retained.size(), d);
  if (estimate.mode == dpgm::CovarianceMode::kDiagonal)
    mix.cov_diag = Matrix(mix.retained.size(), d);
  for (std::size_t r = 0; r < mix.retained.size(); ++r) {
    const auto k = static_cast<std::size_t>(mix.retained[r]);
    std::copy(estimate.means.row(k), estimate.means.row(k) + d, mix.means.row(r));
    if (estimate.mode == dpgm::CovarianceMode::kDiagonal)
      std::copy(estimate.cov_diag.row(k), estimate.cov_diag.row(k) + d, mix.cov_diag.row(r));
    else
      mix.cov_full.push_back(estimate.cov_full[k]);
  }
  return mix;
}

double mixture_log_density(std::span<const double> x, const PrunedMixture& mix) {
  Vector terms(mix.size());
  for (std::size_t r = 0; r < mix.size(); ++r) {
    const std::span<const double> mean(mix.means.row(r), mix.dim());
    double log_phi;
    if (mix.mode == dpgm::CovarianceMode::kDiagonal) {
      log_phi = gaussian_log_density_diag(
          x, mean, std::span<const double>(mix.cov_diag.row(r), mix.dim()));
    } else {
      log_phi = gaussian_log_density_full(x, mean, mix.cov_full[r]);
    }
    terms[r] = std::log(mix.weights[r]) + log_phi;
  }
  return log_sum_exp(terms);
}

} // namespace

double component_log_density(std::span<const double> x, const EnsembleComponent& component) {
  if (x.size() != component.mixture.dim())
    throw UsageError("component_log_density: expected dimension " +
                     std::to_string(component.mixture.dim()) + ", got " +
                     std::to_string(x.size()));
  return mixture_log_density(x, component.mixture);
}

std::vector<double> training_log_densities(const EnsembleComponent& component,
                                           const Matrix& train) {
  check_same_cols(train, component.projection.source_dim(), "training_log_densities");
  const std::size_t d = component.projection.target_dim();
  Vector projected(d);
  std::vector<double> out;
  out.reserve(component.subsample_indices.size());
  for (std::size_t idx : component.subsample_indices) {
    project_row(train.row(idx), component.projection, projected.data());
    out.push_back(mixture_log_density(projected, component.mixture));
  }
  return out;
}

double threshold_from(std::span<const double> log_densities, ThresholdMode mode,
                      std::optional<double> contamination) {
  if (mode == ThresholdMode::kQuantile) {
    if (!contamination)
      throw ConfigError("threshold_from: quantile mode requires contamination");
    return quantile(log_densities, *contamination);
  }
  const double q1 = quantile(log_densities, 0.25);
  const double q3 = quantile(log_densities, 0.75);
  return q1 - 1.5 * (q3 - q1);
}

EnsembleComponent build_component(const Matrix& train, const EnsembleConfig& config,
                                  std::size_t index) {
  config.validate();
  const std::size_t n_total = train.rows();
  const std::size_t p = train.cols();
  if (n_total < 1 || p < 1) throw UsageError("build_component: empty training data");

  const std::uint64_t seed = split_seed(config.master_seed, index);
  Rng rng(seed);

  const std::size_t subspace_dim = sample_subspace_dim(p, rng);
  ProjectionMatrix projection = generate_projection(p, subspace_dim, rng, seed);
  const std::size_t subsample_size = sample_subsample_size(n_total, rng);
  std::vector<std::size_t> indices = rng.sample_without_replacement(n_total, subsample_size);

  const Matrix reduced = project(train.select_rows(indices), projection);
  const dpgm::Hyperparams hyper =
      dpgm::empirical_hyperparams(reduced, config.truncation, config.covariance_mode);
  const dpgm::FitResult fitted = dpgm::fit(reduced, hyper, rng);

  EnsembleComponent component{std::move(projection), std::move(indices),
                              make_pruned(fitted.estimate), 0.0, seed};
  const std::vector<double> log_dens = training_log_densities(component, train);
  component.threshold = threshold_from(log_dens, config.threshold_mode, config.contamination);
  return component;
}

std::vector<EnsembleComponent> fit_detector(const Matrix& train, const EnsembleConfig& config) {
  config.validate();
  const auto m_total = static_cast<std::size_t>(config.ensemble_size);
  std::vector<std::optional<EnsembleComponent>> slots(m_total);
  parallel_for(0, m_total, [&](std::size_t m) {
    try {
      slots[m] = build_component(train, config, m);
    } catch (const std::exception& e) {
      throw NumericError("ensemble component " + std::to_string(m) + " failed: " + e.what());
    }
  });

  std::vector<EnsembleComponent> components;
  components.reserve(m_total);
  for (auto& slot : slots) components.push_back(std::move(*slot));
  return components;
}

DetectionReport score(const Matrix& test, const std::vector<EnsembleComponent>& components,
                      const EnsembleConfig& config) {
  if (components.empty()) throw UsageError("score: no ensemble components");
  const std::size_t n_test = test.rows();
  const std::size_t m_total = components.size();

  // Integer votes per instance; summation over components is exact, so the
  // result does not depend on scheduling.
  std::vector<int> votes(n_test, 0);
  std::mutex votes_mutex;
  parallel_for(0, m_total, [&](std::size_t m) {
    const EnsembleComponent& component = components[m];
    check_same_cols(test, component.projection.source_dim(), "score");
    const std::size_t d = component.projection.target_dim();
    Vector projected(d);
    std::vector<int> local(n_test, 0);
    for (std::size_t i = 0; i < n_test; ++i) {
      project_row(test.row(i), component.projection, projected.data());
      const double log_dens = mixture_log_density(projected, component.mixture);
      if (log_dens < component.threshold) local[i] = 1;
    }
    std::lock_guard<std::mutex> lock(votes_mutex);
    for (std::size_t i = 0; i < n_test; ++i) votes[i] += local[i];
  });

  DetectionReport report;
  report.config = config;
  report.scores.resize(n_test);
  report.memberships.resize(n_test);
  for (std::size_t i = 0; i < n_test; ++i) {
    report.scores[i] = static_cast<double>(votes[i]) / static_cast<double>(m_total);
    report.memberships[i] = report.scores[i] > 0.5 ? 1 : 0;
  }
  report.thresholds.reserve(m_total);
  for (const auto& component : components) report.thresholds.push_back(component.threshold);
  return report;
}

void recompute_thresholds(std::vector<EnsembleComponent>& components, const Matrix& train,
                          ThresholdMode mode, std::optional<double> contamination) {
  for (auto& component : components) {
    const std::vector<double> log_dens = training_log_densities(component, train);
    component.threshold = threshold_from(log_dens, mode, contamination);
  }
}

} // namespace oedpm
