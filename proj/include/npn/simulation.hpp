#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "npn/error.hpp"
#include "npn/estimators.hpp"
#include "npn/matrix.hpp"
#include "npn/rank_stats.hpp"
#include "npn/special.hpp"

namespace npn {

// ---------------------------------------------------------------------------
// Random streams

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based key derivation: each (seed, counter...) tuple names an
/// independent stream, so streams can be created in any order.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

using Rng = std::mt19937_64;

enum class StreamPurpose : std::uint64_t { Sigma = 1, Data = 2, Outliers = 3 };

inline Rng make_stream(std::uint64_t trial_seed, StreamPurpose purpose) {
  return Rng(derive_seed(trial_seed, static_cast<std::uint64_t>(purpose)));
}

// ---------------------------------------------------------------------------
// Data generation

/// Wishart(I_D, D) draw W = G G^T rescaled to unit diagonal. Near-singular
/// draws (lambda_min < 1e-10) are redrawn up to 100 times.
inline CorrelationMatrix sample_correlation_wishart(std::size_t dim, Rng& rng) {
  if (dim == 0) throw Error(ErrorKind::DomainError, "dimension must be positive");
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt <= 100; ++attempt) {
    Matrix g(dim, dim);
    for (double& v : g.data()) v = normal(rng);
    Matrix w(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i; j < dim; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += g(i, k) * g(j, k);
        w(i, j) = s;
        w(j, i) = s;
      }
    Matrix r(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      r(i, i) = 1.0;
      for (std::size_t j = i + 1; j < dim; ++j) {
        const double v = std::clamp(w(i, j) / std::sqrt(w(i, i) * w(j, j)), -1.0, 1.0);
        r(i, j) = v;
        r(j, i) = v;
      }
    }
    SymMatrix sym(std::move(r));
    if (dim == 1 || sym_eigen(sym).min_eigenvalue() >= 1e-10) return CorrelationMatrix(std::move(sym));
  }
  throw Error(ErrorKind::DegenerateDraw, "Wishart draws stayed near-singular after 100 retries");
}

/// n i.i.d. rows from N(0, S) as L z with S = L L^T.
inline DataMatrix sample_gaussian(const CorrelationMatrix& s, std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::DomainError, "sample size must be positive");
  const Matrix l = cholesky_factor(s.sym());
  const std::size_t d = s.dim();
  std::normal_distribution<double> normal;
  Matrix x(n, d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : z) v = normal(rng);
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c <= r; ++c) acc += l(r, c) * z[c];
      x(i, r) = acc;
    }
  }
  return DataMatrix(std::move(x));
}

enum class MarginalTransform { Identity, Exp, Cubic, Tanh, Sigmoid, NormCdf };

inline constexpr std::string_view to_string(MarginalTransform t) noexcept {
  switch (t) {
    case MarginalTransform::Identity: return "identity";
    case MarginalTransform::Exp: return "exp";
    case MarginalTransform::Cubic: return "cubic";
    case MarginalTransform::Tanh: return "tanh";
    case MarginalTransform::Sigmoid: return "sigmoid";
    case MarginalTransform::NormCdf: return "normcdf";
  }
  return "unknown";
}

inline MarginalTransform parse_transform(std::string_view name) {
  for (auto t : {MarginalTransform::Identity, MarginalTransform::Exp, MarginalTransform::Cubic,
                 MarginalTransform::Tanh, MarginalTransform::Sigmoid, MarginalTransform::NormCdf}) {
    if (name == to_string(t)) return t;
  }
  throw Error(ErrorKind::UsageError, "unknown transform '" + std::string(name) + "'");
}

inline double apply_transform(MarginalTransform t, double x) {
  switch (t) {
    case MarginalTransform::Identity: return x;
    case MarginalTransform::Exp: return std::exp(x);
    case MarginalTransform::Cubic: return x * x * x;
    case MarginalTransform::Tanh: return std::tanh(x);
    case MarginalTransform::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case MarginalTransform::NormCdf: return normal_cdf(x);
  }
  return x;
}

/// Transforms column j (0-indexed) iff j < alpha * D.
inline DataMatrix apply_marginal_transform(const DataMatrix& x, double alpha, MarginalTransform t) {
  Matrix out = x.values();
  const double cutoff = alpha * static_cast<double>(x.dim());
  for (std::size_t j = 0; j < x.dim() && static_cast<double>(j) < cutoff; ++j)
    for (std::size_t i = 0; i < x.n(); ++i) out(i, j) = apply_transform(t, out(i, j));
  return DataMatrix(std::move(out));
}

inline std::size_t outlier_count(double beta, std::size_t n) {
  // Guard against 0.29 * 100 == 28.999999999999996.
  return static_cast<std::size_t>(std::floor(beta * static_cast<double>(n) + 1e-9));
}

/// In each column, floor(beta n) rows chosen without replacement (independently
/// per column) are overwritten with -5 or +5 equiprobably.
inline DataMatrix inject_outliers(const DataMatrix& x, double beta, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorKind::DomainError, "beta must lie in [0, 1]");
  const std::size_t count = outlier_count(beta, x.n());
  if (count == 0) return x;
  Matrix out = x.values();
  std::vector<std::size_t> rows(x.n());
  std::bernoulli_distribution coin(0.5);
  for (std::size_t j = 0; j < x.dim(); ++j) {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` slots form a uniform subset.
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, x.n() - 1);
      std::swap(rows[i], rows[pick(rng)]);
    }
    for (std::size_t i = 0; i < count; ++i) out(rows[i], j) = coin(rng) ? 5.0 : -5.0;
  }
  return DataMatrix(std::move(out));
}

/// Symmetric matrix with unit diagonal and |A_ij| <= c^|i-j|. Off-diagonal
/// signs are random; magnitudes sit exactly on the bound when `boundary` is
/// set and are scaled by U(0, 1) otherwise.
inline CorrelationMatrix sample_bandable(std::size_t dim, double c, Rng& rng, bool boundary = true) {
  if (!(c > 0.0 && c < 1.0)) throw Error(ErrorKind::DomainError, "bandable c must lie in (0, 1)");
  if (dim == 0) throw Error(ErrorKind::DomainError, "dimension must be positive");
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix a = Matrix::identity(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j) {
      double v = std::pow(c, static_cast<double>(j - i));
      if (!boundary) v *= unit(rng);
      if (coin(rng)) v = -v;
      a(i, j) = v;
      a(j, i) = v;
    }
  return CorrelationMatrix(SymMatrix(std::move(a)));
}

// ---------------------------------------------------------------------------
// Experiments

enum class ExperimentId { E1_SampleSize = 1, E2_Marginals = 2, E3_Outliers = 3, E4_Sigma = 4 };

inline constexpr std::string_view sweep_parameter(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::E1_SampleSize: return "n";
    case ExperimentId::E2_Marginals: return "alpha";
    case ExperimentId::E3_Outliers: return "beta";
    case ExperimentId::E4_Sigma: return "sigma";
  }
  return "unknown";
}

struct ExperimentSpec {
  ExperimentId id = ExperimentId::E1_SampleSize;
  std::size_t trials = 200;
  std::size_t n = 100;
  std::size_t dim = 25;
  std::vector<double> sweep;
  std::vector<EstimatorConfig> estimators;
  std::uint64_t seed = 0;
  MarginalTransform transform = MarginalTransform::Exp;  // E2 only
  unsigned threads = 1;

  void validate() const {
    if (trials == 0) throw Error(ErrorKind::UsageError, "trials must be positive");
    if (sweep.empty()) throw Error(ErrorKind::UsageError, "sweep grid must be nonempty");
    if (estimators.empty()) throw Error(ErrorKind::UsageError, "no estimators configured");
    if (dim == 0) throw Error(ErrorKind::UsageError, "dimension must be positive");
    for (const auto& e : estimators) e.validate();
    for (double v : sweep) {
      switch (id) {
        case ExperimentId::E1_SampleSize:
          if (!(v >= 2.0) || v != std::floor(v)) throw Error(ErrorKind::UsageError, "n-grid needs integers >= 2");
          break;
        case ExperimentId::E2_Marginals:
        case ExperimentId::E3_Outliers:
          if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::UsageError, "fraction grid must lie in [0, 1]");
          break;
        case ExperimentId::E4_Sigma:
          if (!(v >= 0.0 && v < 1.0)) throw Error(ErrorKind::UsageError, "sigma grid must lie in [0, 1)");
          break;
      }
    }
    if (id != ExperimentId::E1_SampleSize && n < 2) throw Error(ErrorKind::UsageError, "n must be >= 2");
  }
};

/// The five estimators as configured in the experiments: Gauss unregularized,
/// rho/tau at z = 1e-3, kNN at k = 2 (k = 20 under outliers).
inline std::vector<EstimatorConfig> default_estimators(ExperimentId id) {
  const int k = id == ExperimentId::E3_Outliers ? 20 : 2;
  return {
      {EstimatorKind::GaussianPlugin, 0.0, k, TiePolicy::LiteralIndicator},
      {EstimatorKind::Gauss, 0.0, k, TiePolicy::LiteralIndicator},
      {EstimatorKind::Rho, 1e-3, k, TiePolicy::LiteralIndicator},
      {EstimatorKind::Tau, 1e-3, k, TiePolicy::LiteralIndicator},
      {EstimatorKind::Knn, 0.0, k, TiePolicy::LiteralIndicator},
  };
}

inline std::vector<double> default_sweep(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1_SampleSize: return {32, 64, 128, 256, 512, 1024};
    case ExperimentId::E2_Marginals: return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    case ExperimentId::E3_Outliers: return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    case ExperimentId::E4_Sigma: return {0.0, 0.3, 0.6, 0.9, 0.99, 0.999};
  }
  return {};
}

inline ExperimentSpec default_experiment_spec(ExperimentId id) {
  ExperimentSpec spec;
  spec.id = id;
  spec.sweep = default_sweep(id);
  spec.estimators = default_estimators(id);
  if (id == ExperimentId::E4_Sigma) spec.dim = 2;
  return spec;
}

struct TrialRecord {
  double sweep_value = 0.0;
  EstimatorKind estimator = EstimatorKind::Rho;
  double squared_error = 0.0;  // +inf when the estimate was infinite or failed
  std::uint64_t trial_seed = 0;

  [[nodiscard]] bool infinite() const noexcept { return std::isinf(squared_error); }
};

struct MseSummary {
  double sweep_value = 0.0;
  EstimatorKind estimator = EstimatorKind::Rho;
  std::optional<double> mse;  // absent when no trial was finite
  double std_error = 0.0;
  double finite_fraction = 0.0;
  std::size_t trials = 0;
};

/// Groups by (sweep value, estimator) in first-appearance order. MSE and its
/// standard error use finite trials only.
inline std::vector<MseSummary> mse_aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::EmptyGroup, "no trial records to aggregate");
  struct Group {
    MseSummary summary;
    std::vector<double> finite;
  };
  std::vector<Group> groups;
  std::map<std::pair<double, int>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.sweep_value, static_cast<int>(r.estimator));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({MseSummary{r.sweep_value, r.estimator, std::nullopt, 0.0, 0.0, 0}, {}});
    }
    Group& g = groups[it->second];
    ++g.summary.trials;
    if (!r.infinite()) g.finite.push_back(r.squared_error);
  }
  std::vector<MseSummary> out;
  out.reserve(groups.size());
  for (auto& g : groups) {
    const std::size_t m = g.finite.size();
    g.summary.finite_fraction = static_cast<double>(m) / static_cast<double>(g.summary.trials);
    if (m > 0) {
      double mean = 0.0;
      for (double v : g.finite) mean += v;
      mean /= static_cast<double>(m);
      double ss = 0.0;
      for (double v : g.finite) ss += (v - mean) * (v - mean);
      g.summary.mse = mean;
      g.summary.std_error = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m)) : 0.0;
    }
    out.push_back(g.summary);
  }
  return out;
}

namespace detail {

// Sigma and data streams depend only on (seed, trial), so every sweep value
// and every estimator sees common random numbers.
inline void run_trial(const ExperimentSpec& spec, std::size_t trial, std::vector<TrialRecord>& slots) {
  const std::uint64_t trial_seed = derive_seed(spec.seed, trial);
  const std::size_t n_est = spec.estimators.size();
  for (std::size_t s = 0; s < spec.sweep.size(); ++s) {
    const double value = spec.sweep[s];
    auto record = [&](std::size_t e, double err) {
      slots[(s * spec.trials + trial) * n_est + e] = {value, spec.estimators[e].kind, err, trial_seed};
    };
    try {
      Rng sigma_rng = make_stream(trial_seed, StreamPurpose::Sigma);
      Rng data_rng = make_stream(trial_seed, StreamPurpose::Data);
      const bool e4 = spec.id == ExperimentId::E4_Sigma;
      const CorrelationMatrix sigma =
          e4 ? CorrelationMatrix::bivariate(value) : sample_correlation_wishart(spec.dim, sigma_rng);
      const double truth = true_mi(sigma);
      const std::size_t n = spec.id == ExperimentId::E1_SampleSize ? static_cast<std::size_t>(value) : spec.n;
      DataMatrix x = sample_gaussian(sigma, n, data_rng);
      if (spec.id == ExperimentId::E2_Marginals) {
        x = apply_marginal_transform(x, value, spec.transform);
      } else if (spec.id == ExperimentId::E3_Outliers) {
        Rng outlier_rng = make_stream(trial_seed, StreamPurpose::Outliers);
        x = inject_outliers(x, value, outlier_rng);
      }
      for (std::size_t e = 0; e < n_est; ++e) {
        double err = kInfinity;
        try {
          const MiEstimate est = estimate_mi(x, spec.estimators[e]);
          if (!est.infinite()) err = (est.value - truth) * (est.value - truth);
        } catch (const Error&) {
        }
        record(e, err);
      }
    } catch (const Error&) {
      for (std::size_t e = 0; e < n_est; ++e) record(e, kInfinity);
    }
  }
}

}  // namespace detail

/// Raw per-trial squared errors ordered by (sweep value, trial, estimator).
inline std::vector<TrialRecord> run_experiment_records(const ExperimentSpec& input) {
  ExperimentSpec spec = input;
  if (spec.id == ExperimentId::E4_Sigma) spec.dim = 2;
  spec.validate();
  std::vector<TrialRecord> slots(spec.sweep.size() * spec.trials * spec.estimators.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.trials)));
  if (workers == 1) {
    for (std::size_t t = 0; t < spec.trials; ++t) detail::run_trial(spec, t, slots);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < spec.trials; t += workers) detail::run_trial(spec, t, slots);
      });
    }
  }
  return slots;
}

inline std::vector<MseSummary> run_experiment(const ExperimentSpec& spec) {
  return mse_aggregate(run_experiment_records(spec));
}

}  // namespace npn
