#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <vector>

#include "oedpm/data_io.hpp"
#include "oedpm/ensemble.hpp"
#include "support/synthetic.hpp"

using namespace oedpm;

namespace {

EnsembleConfig small_config(int m, std::uint64_t seed) {
  EnsembleConfig config;
  config.ensemble_size = m;
  config.contamination = 0.1;
  config.master_seed = seed;
  return config;
}

dpgm::MixtureEstimate estimate_with_weights(std::vector<double> weights, int active) {
  dpgm::MixtureEstimate est;
  est.weights = std::move(weights);
  est.active_count = active;
  est.means = Matrix(est.weights.size(), 1);
  est.cov_diag = Matrix(est.weights.size(), 1, 1.0);
  return est;
}

} // namespace

TEST_CASE("subsample size bounds") {
  Rng rng(1);
  CHECK(sample_subsample_size(30, rng) == 30);
  for (int i = 0; i < 200; ++i) {
    const auto lympho = sample_subsample_size(148, rng);
    CHECK(lympho >= 50);
    CHECK(lympho <= 148);
    const auto big = sample_subsample_size(5000, rng);
    CHECK(big >= 50);
    CHECK(big <= 1000);
  }
}

TEST_CASE("pruning keeps significant components and renormalizes") {
  {
    const auto pruned = prune_components(estimate_with_weights({0.5, 0.3, 0.2}, 3));
    REQUIRE(pruned.retained == std::vector<int>{0});
    CHECK(pruned.weights[0] == doctest::Approx(1.0));
  }
  {
    const auto pruned = prune_components(estimate_with_weights({0.25, 0.25, 0.25, 0.25}, 4));
    REQUIRE(pruned.retained.size() == 4);
    for (double w : pruned.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
  }
  {
    // Neither reaches 1/2: the argmax fallback keeps exactly one.
    const auto pruned = prune_components(estimate_with_weights({0.45, 0.40}, 2));
    REQUIRE(pruned.retained == std::vector<int>{0});
    CHECK(pruned.weights[0] == doctest::Approx(1.0));
  }
  {
    const auto pruned = prune_components(estimate_with_weights({0.1, 0.6, 0.2}, 3));
    REQUIRE(pruned.retained == std::vector<int>{1});
    CHECK(pruned.weights[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("component log density reduces to the mixture formula") {
  PrunedMixture mix;
  mix.mode = dpgm::CovarianceMode::kDiagonal;
  mix.retained = {0};
  mix.weights = {1.0};
  mix.means = Matrix(1, 1, 0.0);
  mix.cov_diag = Matrix(1, 1, 1.0);

  Rng rng(3);
  EnsembleComponent component{generate_projection(1, 1, rng), {}, mix, 0.0, 0};
  const std::vector<double> at_mean = {0.0};
  CHECK(component_log_density(at_mean, component) ==
        doctest::Approx(-0.9189385).epsilon(1e-7));

  // Two identical equal-weight components collapse to one.
  PrunedMixture twin = mix;
  twin.retained = {0, 1};
  twin.weights = {0.5, 0.5};
  twin.means = Matrix(2, 1, 0.0);
  twin.cov_diag = Matrix(2, 1, 1.0);
  EnsembleComponent twin_component{generate_projection(1, 1, rng), {}, twin, 0.0, 0};
  CHECK(component_log_density(at_mean, twin_component) ==
        doctest::Approx(-0.9189385).epsilon(1e-7));

  const std::vector<double> wrong_dim = {0.0, 1.0};
  CHECK_THROWS_AS(component_log_density(wrong_dim, component), UsageError);
}

TEST_CASE("build_component is deterministic and collapses on small data") {
  const auto data = test_synthetic::tight_cluster_with_far_points(11, 48, 2);
  const EnsembleConfig config = small_config(1, 2024);

  const EnsembleComponent a = build_component(data.features, config, 0);
  const EnsembleComponent b = build_component(data.features, config, 0);
  CHECK(a.component_seed == b.component_seed);
  CHECK(a.threshold == b.threshold);
  CHECK(a.subsample_indices == b.subsample_indices);

  // N=50, p=2: both reduction rules collapse.
  CHECK(a.projection.target_dim() == 2);
  CHECK(a.subsample_indices.size() == 50);
}

TEST_CASE("threshold separates a tight cluster from far points") {
  const auto data = test_synthetic::tight_cluster_with_far_points(21);
  const EnsembleConfig config = small_config(1, 7);
  const EnsembleComponent component = build_component(data.features, config, 0);

  std::size_t outliers_below = 0, inliers_above = 0, inliers_total = 0;
  Vector projected(component.projection.target_dim());
  for (std::size_t i = 0; i < data.features.rows(); ++i) {
    project_row(data.features.row(i), component.projection, projected.data());
    const double log_dens = component_log_density(projected, component);
    if (data.labels[i] == 1) {
      if (log_dens < component.threshold) ++outliers_below;
    } else {
      ++inliers_total;
      if (log_dens >= component.threshold) ++inliers_above;
    }
  }
  CHECK(outliers_below == 5);
  CHECK(inliers_above >= static_cast<std::size_t>(0.85 * inliers_total));
}

TEST_CASE("score applies strict thresholds and votes") {
  const auto data = test_synthetic::tight_cluster_with_far_points(31, 60, 0);
  EnsembleConfig config = small_config(4, 5);
  auto components = fit_detector(data.features, config);
  REQUIRE(components.size() == 4);

  // Force the vote pattern: three components always vote, one never does.
  const double never = -std::numeric_limits<double>::infinity();
  const double always = std::numeric_limits<double>::infinity();
  components[0].threshold = always;
  components[1].threshold = always;
  components[2].threshold = always;
  components[3].threshold = never;
  DetectionReport report = score(data.features, components, config);
  for (double s : report.scores) CHECK(s == doctest::Approx(0.75));
  for (int m : report.memberships) CHECK(m == 1);

  // No component votes.
  for (auto& c : components) c.threshold = never;
  report = score(data.features, components, config);
  for (double s : report.scores) CHECK(s == doctest::Approx(0.0));
  for (int m : report.memberships) CHECK(m == 0);

  // Exactly half the votes is still an inlier (strict > 1/2).
  components[0].threshold = always;
  components[1].threshold = always;
  report = score(data.features, components, config);
  for (double s : report.scores) CHECK(s == doctest::Approx(0.5));
  for (int m : report.memberships) CHECK(m == 0);
}

TEST_CASE("detector is deterministic across worker counts") {
  const auto data = test_synthetic::clusters_with_box_outliers(3, 180, 20, 6);
  EnsembleConfig config = small_config(8, 99);

  setenv("OEDPM_THREADS", "1", 1);
  const auto serial = fit_detector(data.features, config);
  const auto serial_report = score(data.features, serial, config);
  setenv("OEDPM_THREADS", "4", 1);
  const auto parallel = fit_detector(data.features, config);
  const auto parallel_report = score(data.features, parallel, config);
  unsetenv("OEDPM_THREADS");

  REQUIRE(serial.size() == parallel.size());
  for (std::size_t m = 0; m < serial.size(); ++m) {
    CHECK(serial[m].component_seed == parallel[m].component_seed);
    CHECK(serial[m].threshold == parallel[m].threshold);
  }
  CHECK(serial_report.scores == parallel_report.scores);
}

TEST_CASE("single-component detector equals build_component") {
  const auto data = test_synthetic::tight_cluster_with_far_points(41, 80, 3);
  const EnsembleConfig config = small_config(1, 17);
  const auto detector = fit_detector(data.features, config);
  const EnsembleComponent solo = build_component(data.features, config, 0);
  REQUIRE(detector.size() == 1);
  CHECK(detector[0].component_seed == solo.component_seed);
  CHECK(detector[0].threshold == solo.threshold);
}

TEST_CASE("scores are exact multiples of 1/M and weights sum to one") {
  const auto data = test_synthetic::clusters_with_box_outliers(5, 270, 30, 4);
  EnsembleConfig config = small_config(25, 1234);
  const auto components = fit_detector(data.features, config);
  const auto report = score(data.features, components, config);

  for (const auto& component : components) {
    double total = 0.0;
    for (double w : component.mixture.weights) total += w;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(!component.mixture.retained.empty());
  }
  for (double s : report.scores) {
    const double scaled = s * 25.0;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
  }

  // Estimated outlier fraction stays within [0, 3 phi] on clean data.
  std::size_t flagged = 0;
  for (int m : report.memberships) flagged += static_cast<std::size_t>(m);
  const double fraction = static_cast<double>(flagged) / static_cast<double>(report.scores.size());
  CHECK(fraction <= 0.3);
}

TEST_CASE("raising phi never lowers a threshold") {
  const auto data = test_synthetic::tight_cluster_with_far_points(61);
  EnsembleConfig config = small_config(3, 55);
  auto components = fit_detector(data.features, config);

  std::vector<double> previous(components.size(), -std::numeric_limits<double>::infinity());
  for (double phi : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    recompute_thresholds(components, data.features, ThresholdMode::kQuantile, phi);
    for (std::size_t m = 0; m < components.size(); ++m) {
      CHECK(components[m].threshold >= previous[m]);
      previous[m] = components[m].threshold;
    }
  }
}

TEST_CASE("config validation") {
  EnsembleConfig config;
  config.contamination = 1.5;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.contamination = 0.1;
  config.ensemble_size = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.ensemble_size = 10;
  config.threshold_mode = ThresholdMode::kQuantile;
  config.contamination.reset();
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.threshold_mode = ThresholdMode::kIqr;
  CHECK_NOTHROW(config.validate());
}
