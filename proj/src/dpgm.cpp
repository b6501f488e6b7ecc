#include "oedpm/dpgm.hpp"

#include <cmath>
#include <string>

#include "oedpm/kernels.hpp"
#include "oedpm/math.hpp"

namespace oedpm::dpgm {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kLogTwo = 0.69314718055994530941723212145818;

// Ridge added to every posterior scale diagonal, relative to the prior scale.
double ridge_for(const Hyperparams& hyper) {
  double mean_diag = 0.0;
  const std::size_t d = hyper.dim();
  if (hyper.mode == CovarianceMode::kDiagonal) {
    for (double v : hyper.psi_diag) mean_diag += v;
  } else {
    for (std::size_t j = 0; j < d; ++j) mean_diag += hyper.psi_full(j, j);
  }
  return 1e-6 * mean_diag / static_cast<double>(d);
}

// Sum of digamma((nu + 1 - j)/2), j = 1..d.
double wishart_digamma_sum(double nu, std::size_t d) {
  double acc = 0.0;
  for (std::size_t j = 1; j <= d; ++j)
    acc += digamma(0.5 * (nu + 1.0 - static_cast<double>(j)));
  return acc;
}

// log normalizer of Wishart(nu, Psi^{-1}).
double log_wishart_b(double nu, double log_det_psi, std::size_t d) {
  return 0.5 * nu * log_det_psi - 0.5 * nu * static_cast<double>(d) * kLogTwo -
         log_multigamma(0.5 * nu, d);
}

} // namespace

void Hyperparams::validate() const {
  const std::size_t d = dim();
  if (d == 0) throw UsageError("Hyperparams: empty prior mean");
  if (!(alpha > 0.0)) throw UsageError("Hyperparams: alpha must be positive");
  if (!(b > 0.0)) throw UsageError("Hyperparams: b must be positive");
  if (!(nu >= static_cast<double>(d)))
    throw UsageError("Hyperparams: nu must be >= dimension");
  if (truncation < 1) throw UsageError("Hyperparams: truncation must be >= 1");
  if (mode == CovarianceMode::kDiagonal) {
    if (psi_diag.size() != d) throw UsageError("Hyperparams: psi_diag size mismatch");
    for (double v : psi_diag)
      if (!(v > 0.0)) throw UsageError("Hyperparams: psi_diag entries must be positive");
  } else {
    if (psi_full.rows() != d || psi_full.cols() != d)
      throw UsageError("Hyperparams: psi_full shape mismatch");
  }
}

Hyperparams empirical_hyperparams(const Matrix& data, int truncation, CovarianceMode mode) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n == 0 || d == 0) throw UsageError("empirical_hyperparams: empty data");

  Hyperparams hyper;
  hyper.mode = mode;
  hyper.truncation = truncation;
  hyper.nu = static_cast<double>(d);

  hyper.xi.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::active().axpy(1.0, data.row(i), hyper.xi.data(), d);
  for (double& v : hyper.xi) v /= static_cast<double>(n);

  constexpr double kZeroVarianceFloor = 1e-6;
  if (mode == CovarianceMode::kDiagonal) {
    hyper.psi_diag.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      kernels::active().accum_sq_diff(data.row(i), hyper.xi.data(), 1.0,
                                      hyper.psi_diag.data(), d);
    for (double& v : hyper.psi_diag) {
      v /= static_cast<double>(n);
      if (v < kZeroVarianceFloor) v = kZeroVarianceFloor;
    }
  } else {
    hyper.psi_full = Matrix(d, d);
    Vector diff(d);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = data.row(i);
      for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - hyper.xi[j];
      for (std::size_t r = 0; r < d; ++r)
        kernels::active().axpy(diff[r], diff.data(), hyper.psi_full.row(r), d);
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) hyper.psi_full(r, c) /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j)
      if (hyper.psi_full(j, j) < kZeroVarianceFloor) hyper.psi_full(j, j) = kZeroVarianceFloor;
  }
  return hyper;
}

VariationalState init_state(const Matrix& data, const Hyperparams& hyper, Rng& rng) {
  hyper.validate();
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t K = static_cast<std::size_t>(hyper.truncation);
  if (n == 0) throw UsageError("init_state: empty data");
  if (d != hyper.dim()) throw UsageError("init_state: data dimension mismatch");
  if (hyper.mode == CovarianceMode::kFull && d > n)
    throw ConfigError("init_state: full covariance requires d <= n (d=" + std::to_string(d) +
                      ", n=" + std::to_string(n) + "); use diagonal mode");

  VariationalState state;
  state.mode = hyper.mode;
  state.resp = Matrix(n, K);

  // Seeded hard assignment to the nearest of K random data anchors, plus
  // symmetric Dirichlet(1) jitter, renormalized. Anchors spread the initial
  // component means across the data support; a uniform random assignment
  // starts every component at the global mean and coordinate ascent cannot
  // separate clusters from there.
  const std::size_t n_anchors = std::min(n, K);
  const std::vector<std::size_t> anchors = rng.sample_without_replacement(n, n_anchors);
  const Vector unit_coef(d, 1.0);
  const auto& kern = kernels::active();

  Vector jitter(K);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = 0;
    double best = kern.quad_diag(data.row(i), data.row(anchors[0]), unit_coef.data(), d);
    for (std::size_t a = 1; a < n_anchors; ++a) {
      const double dist =
          kern.quad_diag(data.row(i), data.row(anchors[a]), unit_coef.data(), d);
      if (dist < best) {
        best = dist;
        pick = a;
      }
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      jitter[k] = rng.exponential();
      total += jitter[k];
    }
    double* row = state.resp.row(i);
    for (std::size_t k = 0; k < K; ++k)
      row[k] = 0.5 * ((k == pick ? 1.0 : 0.0) + jitter[k] / total);
  }

  state.gamma1.assign(K, 1.0);
  state.gamma2.assign(K, hyper.alpha);
  state.xi_tilde = Matrix(K, d);
  state.b_tilde.assign(K, hyper.b);
  state.nu_tilde.assign(K, hyper.nu);
  if (hyper.mode == CovarianceMode::kDiagonal) {
    state.psi_diag = Matrix(K, d);
  } else {
    state.psi_full.assign(K, Matrix(d, d));
  }

  update_stick_breaking(state, hyper);
  update_niw(state, data, hyper);
  return state;
}

void update_responsibilities(VariationalState& state, const Matrix& data,
                             const Hyperparams& hyper) {
  const std::size_t n = state.n();
  const std::size_t K = state.k();
  const std::size_t d = state.dim();
  const auto& kern = kernels::active();

  // Stick-breaking expectations, prefix sums over components.
  Vector psi_g1(K), psi_g2(K), psi_sum(K);
  for (std::size_t k = 0; k < K; ++k) {
    psi_g1[k] = digamma(state.gamma1[k]);
    psi_g2[k] = digamma(state.gamma2[k]);
    psi_sum[k] = digamma(state.gamma1[k] + state.gamma2[k]);
  }

  double prefix_g2 = 0.0, prefix_sum = 0.0;
  Vector coef(d);
  for (std::size_t k = 0; k < K; ++k) {
    prefix_sum += psi_sum[k];
    const double stick = psi_g1[k] + prefix_g2 - prefix_sum;
    prefix_g2 += psi_g2[k];

    const double nu_k = state.nu_tilde[k];
    const double half_dig = 0.5 * wishart_digamma_sum(nu_k, d);
    const double mean_prec_term = -0.5 * static_cast<double>(d) / state.b_tilde[k];
    const double* mean = state.xi_tilde.row(k);

    if (state.mode == CovarianceMode::kDiagonal) {
      const double* psi_row = state.psi_diag.row(k);
      double log_det = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        log_det += std::log(psi_row[j]);
        coef[j] = nu_k / psi_row[j];
      }
      const double base = stick - 0.5 * log_det + half_dig + mean_prec_term;
      for (std::size_t i = 0; i < n; ++i) {
        const double quad = kern.quad_diag(data.row(i), mean, coef.data(), d);
        state.resp(i, k) = base - 0.5 * quad;
      }
    } else {
      try {
        Cholesky chol(state.psi_full[k]);
        const double base = stick - 0.5 * chol.log_det() + half_dig + mean_prec_term;
        Vector diff(d);
        for (std::size_t i = 0; i < n; ++i) {
          const double* row = data.row(i);
          for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - mean[j];
          state.resp(i, k) = base - 0.5 * nu_k * chol.inv_quad_form(diff);
        }
      } catch (const NumericError&) {
        throw NumericError("update_responsibilities: posterior scale of component " +
                           std::to_string(k) + " is not positive definite");
      }
    }
  }

  // Row-wise normalization in log space.
  for (std::size_t i = 0; i < n; ++i) {
    double* row = state.resp.row(i);
    const double lse = log_sum_exp(std::span<const double>(row, K));
    for (std::size_t k = 0; k < K; ++k) row[k] = std::exp(row[k] - lse);
  }
}

void update_stick_breaking(VariationalState& state, const Hyperparams& hyper) {
  const std::size_t n = state.n();
  const std::size_t K = state.k();

  Vector counts(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = state.resp.row(i);
    for (std::size_t k = 0; k < K; ++k) counts[k] += row[k];
  }

  double tail = 0.0;
  for (std::size_t k = K; k-- > 0;) {
    state.gamma1[k] = 1.0 + counts[k];
    state.gamma2[k] = hyper.alpha + tail;
    tail += counts[k];
  }
}

void update_niw(VariationalState& state, const Matrix& data, const Hyperparams& hyper) {
  const std::size_t n = state.n();
  const std::size_t K = state.k();
  const std::size_t d = state.dim();
  const auto& kern = kernels::active();
  const double ridge = ridge_for(hyper);

  Vector weighted_mean(d);
  for (std::size_t k = 0; k < K; ++k) {
    double n_k = 0.0;
    for (std::size_t i = 0; i < n; ++i) n_k += state.resp(i, k);

    // Responsibility-weighted mean; an empty component falls back to the
    // prior mean, which reduces every posterior quantity to the prior.
    std::fill(weighted_mean.begin(), weighted_mean.end(), 0.0);
    if (n_k > 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        kern.axpy(state.resp(i, k), data.row(i), weighted_mean.data(), d);
      for (double& v : weighted_mean) v /= n_k;
    } else {
      std::copy(hyper.xi.begin(), hyper.xi.end(), weighted_mean.begin());
    }

    const double denom = hyper.b + n_k;
    double* xi_row = state.xi_tilde.row(k);
    for (std::size_t j = 0; j < d; ++j)
      xi_row[j] = (hyper.b * hyper.xi[j] + n_k * weighted_mean[j]) / denom;
    state.b_tilde[k] = denom;
    state.nu_tilde[k] = hyper.nu + n_k;

    const double shrink = hyper.b * n_k / denom;
    if (state.mode == CovarianceMode::kDiagonal) {
      double* psi_row = state.psi_diag.row(k);
      for (std::size_t j = 0; j < d; ++j) psi_row[j] = hyper.psi_diag[j];
      for (std::size_t i = 0; i < n; ++i)
        kern.accum_sq_diff(data.row(i), weighted_mean.data(), state.resp(i, k), psi_row, d);
      for (std::size_t j = 0; j < d; ++j) {
        const double dm = weighted_mean[j] - hyper.xi[j];
        psi_row[j] += shrink * dm * dm + ridge;
      }
    } else {
      Matrix& psi = state.psi_full[k];
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) psi(r, c) = hyper.psi_full(r, c);
      Vector diff(d);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = state.resp(i, k);
        if (w == 0.0) continue;
        const double* row = data.row(i);
        for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - weighted_mean[j];
        for (std::size_t r = 0; r < d; ++r)
          kern.axpy(w * diff[r], diff.data(), psi.row(r), d);
      }
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          const double dr = weighted_mean[r] - hyper.xi[r];
          const double dc = weighted_mean[c] - hyper.xi[c];
          psi(r, c) += shrink * dr * dc;
        }
        psi(r, r) += ridge;
      }
    }
  }
}

double compute_elbo(const VariationalState& state, const Matrix& data,
                    const Hyperparams& hyper) {
  const std::size_t n = state.n();
  const std::size_t K = state.k();
  const std::size_t d = state.dim();
  const double dd = static_cast<double>(d);
  const auto& kern = kernels::active();

  // Prior scale log-determinant.
  double log_det_prior;
  if (state.mode == CovarianceMode::kDiagonal) {
    log_det_prior = 0.0;
    for (double v : hyper.psi_diag) log_det_prior += std::log(v);
  } else {
    log_det_prior = Cholesky(hyper.psi_full).log_det();
  }
  const double log_b_prior = log_wishart_b(hyper.nu, log_det_prior, d);

  Vector counts(K, 0.0);
  double entropy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = state.resp.row(i);
    for (std::size_t k = 0; k < K; ++k) {
      counts[k] += row[k];
      if (row[k] > 0.0) entropy -= row[k] * std::log(row[k]);
    }
  }
  Vector tail(K, 0.0);
  {
    double acc = 0.0;
    for (std::size_t k = K; k-- > 0;) {
      tail[k] = acc;
      acc += counts[k];
    }
  }

  double elbo = entropy;
  Vector coef(d), diff(d);
  for (std::size_t k = 0; k < K; ++k) {
    const double g1 = state.gamma1[k];
    const double g2 = state.gamma2[k];
    const double e_log_v = digamma(g1) - digamma(g1 + g2);
    const double e_log_1mv = digamma(g2) - digamma(g1 + g2);
    const double nu_k = state.nu_tilde[k];
    const double b_k = state.b_tilde[k];
    const double* mean = state.xi_tilde.row(k);

    double log_det_k;       // log |Psi_tilde_k|
    double data_quad;       // sum_i resp_ik (x_i - xi_k)' Psi_k^{-1} (x_i - xi_k)
    double prior_quad;      // (xi_k - xi)' Psi_k^{-1} (xi_k - xi)
    double trace_k;         // tr(Psi Psi_k^{-1})
    if (state.mode == CovarianceMode::kDiagonal) {
      const double* psi_row = state.psi_diag.row(k);
      log_det_k = 0.0;
      trace_k = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        log_det_k += std::log(psi_row[j]);
        coef[j] = 1.0 / psi_row[j];
        trace_k += hyper.psi_diag[j] * coef[j];
      }
      data_quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = state.resp(i, k);
        if (w == 0.0) continue;
        data_quad += w * kern.quad_diag(data.row(i), mean, coef.data(), d);
      }
      prior_quad = kern.quad_diag(hyper.xi.data(), mean, coef.data(), d);
    } else {
      Cholesky chol(state.psi_full[k]);
      log_det_k = chol.log_det();
      const Matrix inv = chol.inverse();
      trace_k = 0.0;
      for (std::size_t r = 0; r < d; ++r)
        trace_k += kern.dot(hyper.psi_full.row(r), inv.row(r), d);
      data_quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = state.resp(i, k);
        if (w == 0.0) continue;
        const double* row = data.row(i);
        for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - mean[j];
        data_quad += w * chol.inv_quad_form(diff);
      }
      for (std::size_t j = 0; j < d; ++j) diff[j] = hyper.xi[j] - mean[j];
      prior_quad = chol.inv_quad_form(diff);
    }

    const double e_log_det_lam = wishart_digamma_sum(nu_k, d) + dd * kLogTwo - log_det_k;

    // Expected complete-data log-likelihood.
    elbo += 0.5 * (counts[k] * (e_log_det_lam - dd * kLogTwoPi - dd / b_k) -
                   nu_k * data_quad);
    // E log p(Z | V) and the stick-breaking prior.
    elbo += counts[k] * e_log_v + tail[k] * e_log_1mv;
    elbo += std::log(hyper.alpha) + (hyper.alpha - 1.0) * e_log_1mv;
    // E log p(mu, Lambda).
    elbo += 0.5 * (dd * (std::log(hyper.b) - kLogTwoPi) + e_log_det_lam -
                   dd * hyper.b / b_k - hyper.b * nu_k * prior_quad);
    elbo += log_b_prior + 0.5 * (hyper.nu - dd - 1.0) * e_log_det_lam -
            0.5 * nu_k * trace_k;
    // - E log q(V).
    elbo -= std::lgamma(g1 + g2) - std::lgamma(g1) - std::lgamma(g2) +
            (g1 - 1.0) * e_log_v + (g2 - 1.0) * e_log_1mv;
    // - E log q(mu, Lambda).
    elbo -= 0.5 * (dd * (std::log(b_k) - kLogTwoPi) + e_log_det_lam - dd);
    elbo -= log_wishart_b(nu_k, log_det_k, d) +
            0.5 * (nu_k - dd - 1.0) * e_log_det_lam - 0.5 * nu_k * dd;
  }

  if (!std::isfinite(elbo))
    throw NumericError("compute_elbo: objective is not finite");
  return elbo;
}

MixtureEstimate point_estimates(const VariationalState& state, const Matrix& data) {
  const std::size_t n = state.n();
  const std::size_t K = state.k();
  const std::size_t d = state.dim();

  MixtureEstimate est;
  est.mode = state.mode;

  // Stick-breaking weights from the beta posterior means.
  est.weights.assign(K, 0.0);
  double log_stick_remainder = 0.0; // log prod_{j<k} gamma2_j/(gamma1_j+gamma2_j)
  for (std::size_t k = 0; k < K; ++k) {
    const double g1 = state.gamma1[k];
    const double g2 = state.gamma2[k];
    est.weights[k] = std::exp(std::log(g1) - std::log(g1 + g2) + log_stick_remainder);
    log_stick_remainder += std::log(g2) - std::log(g1 + g2);
  }

  est.means = state.xi_tilde;
  if (state.mode == CovarianceMode::kDiagonal) {
    est.cov_diag = Matrix(K, d);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < d; ++j)
        est.cov_diag(k, j) = state.psi_diag(k, j) / state.nu_tilde[k];
  } else {
    est.cov_full.assign(K, Matrix(d, d));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
          est.cov_full[k](r, c) = state.psi_full[k](r, c) / state.nu_tilde[k];
  }

  est.assignments.assign(n, 0);
  std::vector<int> occupied(K, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = state.resp.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k)
      if (row[k] > row[best]) best = k; // ties keep the smallest index
    est.assignments[i] = static_cast<int>(best);
    occupied[best] = 1;
  }
  est.active_count = 0;
  for (int o : occupied) est.active_count += o;
  return est;
}

FitResult fit(const Matrix& data, const Hyperparams& hyper, Rng& rng,
              int max_iter, double tol) {
  VariationalState state = init_state(data, hyper, rng);
  state.elbo_history.push_back(compute_elbo(state, data, hyper));

  for (int it = 0; it < max_iter; ++it) {
    update_responsibilities(state, data, hyper);
    update_stick_breaking(state, hyper);
    update_niw(state, data, hyper);
    const double elbo = compute_elbo(state, data, hyper);
    state.elbo_history.push_back(elbo);
    state.iterations = it + 1;

    const double prev = state.elbo_history[state.elbo_history.size() - 2];
    const double scale = std::max(std::abs(prev), 1.0);
    if (std::abs(elbo - prev) < tol * scale) {
      state.converged = true;
      break;
    }
  }

  FitResult result{std::move(state), {}};
  result.estimate = point_estimates(result.state, data);
  return result;
}

} // namespace oedpm::dpgm
