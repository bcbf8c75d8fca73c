#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "npn/error.hpp"
#include "npn/matrix.hpp"
#include "npn/rank_stats.hpp"
#include "npn/special.hpp"

namespace npn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class EstimatorKind { GaussianPlugin, Gauss, Rho, Tau, Knn };

inline constexpr std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::GaussianPlugin: return "gaussian";
    case EstimatorKind::Gauss: return "gauss";
    case EstimatorKind::Rho: return "rho";
    case EstimatorKind::Tau: return "tau";
    case EstimatorKind::Knn: return "knn";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator_kind(std::string_view name) {
  for (auto kind : {EstimatorKind::GaussianPlugin, EstimatorKind::Gauss, EstimatorKind::Rho,
                    EstimatorKind::Tau, EstimatorKind::Knn}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::UsageError, "unknown estimator '" + std::string(name) + "'");
}

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::Rho;
  double z = 1e-3;  // 0 means "no projection" and is only accepted for Gauss
  int k = 2;
  TiePolicy tie_policy = TiePolicy::LiteralIndicator;

  void validate() const {
    if (!(z >= 0.0)) throw Error(ErrorKind::DomainError, "z must be nonnegative");
    if ((kind == EstimatorKind::Rho || kind == EstimatorKind::Tau) && !(z > 0.0)) {
      throw Error(ErrorKind::DomainError, "rho and tau estimators need z > 0");
    }
    if (k < 1) throw Error(ErrorKind::DomainError, "k must be at least 1");
  }
};

struct MiEstimate {
  double value = 0.0;  // +inf for the degenerate kNN / singular Gauss paths
  EstimatorKind estimator = EstimatorKind::Rho;
  std::optional<double> lambda_min;  // of the latent estimate before projection
  std::size_t clamped = 0;
  std::optional<double> mean_diagonal;  // Gauss only: mean of diag(Sigma_G)

  [[nodiscard]] bool infinite() const noexcept { return std::isinf(value); }
};

/// I(X) = -1/2 log|Sigma| for a nonparanormal with latent correlation Sigma.
inline double true_mi(const CorrelationMatrix& sigma) { return -0.5 * cholesky_logdet(sigma.sym()); }

/// -1/2 log|Shat_z| after projecting Shat onto the cone lambda_min >= z.
inline MiEstimate mi_from_latent(const SymMatrix& shat, double z) {
  const ConeProjection proj = project_to_cone_detailed(shat, z);
  MiEstimate out;
  out.value = -0.5 * cholesky_logdet(proj.matrix);
  out.lambda_min = proj.min_eigenvalue_before;
  out.clamped = proj.clamped;
  return out;
}

/// E[log|R|] for the empirical correlation matrix R of n i.i.d. N(0, I_D) samples:
/// sum_{j=1}^{D} psi((n - j) / 2) - D psi((n - 1) / 2).
inline double gaussian_plugin_bias(std::size_t n, std::size_t dim) {
  if (n <= dim) throw Error(ErrorKind::SingularScatter, "bias term needs n > D");
  double b = 0.0;
  const double head = digamma((static_cast<double>(n) - 1.0) / 2.0);
  for (std::size_t j = 1; j <= dim; ++j) b += digamma((static_cast<double>(n) - static_cast<double>(j)) / 2.0) - head;
  return b;
}

/// Bias-corrected Gaussian plug-in: -1/2 [log|R| - E log|R|_{Sigma = I}] with R the
/// empirical correlation matrix.
inline MiEstimate mi_gaussian_plugin(const DataMatrix& x) {
  const std::size_t n = x.n();
  const std::size_t d = x.dim();
  if (n <= d) throw Error(ErrorKind::SingularScatter, "gaussian plug-in needs n > D");
  MiEstimate out;
  out.estimator = EstimatorKind::GaussianPlugin;
  if (d == 1) return out;
  double logdet = 0.0;
  try {
    logdet = cholesky_logdet(detail::pearson_columns(x.values(), true));
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularScatter, e.what());
  }
  out.value = -0.5 * (logdet - gaussian_plugin_bias(n, d));
  return out;
}

namespace detail {

// Squared distance from row i to its k-th nearest other row. Rows are visited
// in order of the first coordinate and the scan stops once that coordinate
// alone exceeds the current k-th best.
inline std::vector<double> kth_neighbor_sq_distances(const Matrix& p, std::size_t k) {
  const std::size_t n = p.rows();
  const std::size_t d = p.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p(a, 0) < p(b, 0); });

  std::vector<double> out(n);
  std::priority_queue<double> best;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    best = {};
    auto consider = [&](std::size_t other) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = p(i, c) - p(other, c);
        s += diff * diff;
      }
      if (best.size() < k) {
        best.push(s);
      } else if (s < best.top()) {
        best.pop();
        best.push(s);
      }
    };
    auto done = [&](std::size_t other) {
      if (best.size() < k) return false;
      const double dx = p(i, 0) - p(other, 0);
      return dx * dx > best.top();
    };
    for (std::size_t r = pos + 1; r < n && !done(order[r]); ++r) consider(order[r]);
    for (std::size_t l = pos; l-- > 0 && !done(order[l]);) consider(order[l]);
    out[i] = best.top();
  }
  return out;
}

}  // namespace detail

/// Kozachenko-Leonenko entropy with Euclidean k-th neighbor distances.
/// Returns +inf when some sample has k exact duplicates (epsilon_i = 0).
inline double knn_entropy(const DataMatrix& x, int k) {
  if (k < 1) throw Error(ErrorKind::DomainError, "k must be at least 1");
  const std::size_t n = x.n();
  const auto kk = static_cast<std::size_t>(k);
  if (n <= kk) throw Error(ErrorKind::InsufficientSamples, "kNN entropy needs n > k");
  const auto d = static_cast<double>(x.dim());
  const std::vector<double> sq = detail::kth_neighbor_sq_distances(x.values(), kk);
  double log_sum = 0.0;
  for (double s : sq) {
    if (s == 0.0) return kInfinity;
    log_sum += 0.5 * std::log(s);
  }
  const double log_unit_ball = 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
  return digamma(static_cast<double>(n)) - digamma(static_cast<double>(k)) + log_unit_ball +
         d * log_sum / static_cast<double>(n);
}

/// sum_j H(X_j) - H(X) with each term from knn_entropy.
inline MiEstimate mi_knn(const DataMatrix& x, int k) {
  MiEstimate out;
  out.estimator = EstimatorKind::Knn;
  double marginals = 0.0;
  for (std::size_t j = 0; j < x.dim(); ++j) {
    const double h = knn_entropy(DataMatrix::from_columns({x.column(j)}), k);
    if (std::isinf(h)) {
      out.value = kInfinity;
      return out;
    }
    marginals += h;
  }
  const double joint = knn_entropy(x, k);
  out.value = std::isinf(joint) ? kInfinity : marginals - joint;
  return out;
}

inline MiEstimate estimate_mi(const DataMatrix& x, const EstimatorConfig& cfg) {
  cfg.validate();
  if (x.n() < 2) throw Error(ErrorKind::InsufficientSamples, "need at least 2 samples");
  MiEstimate out;
  switch (cfg.kind) {
    case EstimatorKind::GaussianPlugin:
      return mi_gaussian_plugin(x);
    case EstimatorKind::Knn:
      return mi_knn(x, cfg.k);
    case EstimatorKind::Gauss: {
      const SymMatrix shat = sigma_g(x, cfg.tie_policy);
      double diag = 0.0;
      for (std::size_t j = 0; j < shat.dim(); ++j) diag += shat(j, j);
      diag /= static_cast<double>(shat.dim());
      if (cfg.z > 0.0) {
        out = mi_from_latent(shat, cfg.z);
      } else {
        out.lambda_min = sym_eigen(shat).min_eigenvalue();
        try {
          out.value = -0.5 * cholesky_logdet(shat);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
          out.value = kInfinity;
        }
      }
      out.mean_diagonal = diag;
      break;
    }
    case EstimatorKind::Rho:
      out = mi_from_latent(latent_from_rank_corr(spearman_matrix(x, cfg.tie_policy), RankCorrelation::Spearman),
                           cfg.z);
      break;
    case EstimatorKind::Tau:
      out = mi_from_latent(latent_from_rank_corr(kendall_matrix(x), RankCorrelation::Kendall), cfg.z);
      break;
  }
  out.estimator = cfg.kind;
  return out;
}

struct EntropyEstimate {
  double entropy;        // marginal_sum - mi
  double marginal_sum;   // sum_j of univariate kNN entropies
  double mi;             // rho estimate at floor z
};

/// H(X) = sum_j H(X_j) - I(X), with kNN marginals and the rank-based I.
/// A degenerate marginal (duplicate samples) yields +inf entropy.
inline EntropyEstimate entropy_npn_detailed(const DataMatrix& x, double z, int k,
                                            TiePolicy policy = TiePolicy::LiteralIndicator) {
  EstimatorConfig cfg{EstimatorKind::Rho, z, k, policy};
  cfg.validate();
  if (x.n() <= static_cast<std::size_t>(k)) throw Error(ErrorKind::InsufficientSamples, "entropy needs n > k");
  double marginals = 0.0;
  for (std::size_t j = 0; j < x.dim(); ++j) marginals += knn_entropy(DataMatrix::from_columns({x.column(j)}), k);
  const double mi = estimate_mi(x, cfg).value;
  return {marginals - mi, marginals, mi};
}

inline double entropy_npn(const DataMatrix& x, double z, int k, TiePolicy policy = TiePolicy::LiteralIndicator) {
  return entropy_npn_detailed(x, z, k, policy).entropy;
}

}  // namespace npn
