#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "npn/error.hpp"
#include "npn/matrix.hpp"
#include "npn/special.hpp"

namespace npn {

/// n x D samples (rows) of D variables (columns). All entries finite.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0) {
      throw Error(ErrorKind::DomainError, "data matrix must have at least one row and column");
    }
    for (std::size_t i = 0; i < values_.rows(); ++i)
      for (std::size_t j = 0; j < values_.cols(); ++j)
        if (!std::isfinite(values_(i, j))) {
          throw Error(ErrorKind::NonFiniteValue, "non-finite value at row " + std::to_string(i + 1) +
                                                     ", column " + std::to_string(j + 1));
        }
  }
  DataMatrix(std::initializer_list<std::initializer_list<double>> init) : DataMatrix(Matrix(init)) {}

  /// Builds an n x D matrix from D column vectors.
  static DataMatrix from_columns(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) throw Error(ErrorKind::DomainError, "no columns");
    Matrix m(columns.front().size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != m.rows()) throw Error(ErrorKind::DomainError, "ragged columns");
      m.set_column(j, columns[j]);
    }
    return DataMatrix(std::move(m));
  }

  [[nodiscard]] std::size_t n() const noexcept { return values_.rows(); }
  [[nodiscard]] std::size_t dim() const noexcept { return values_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  [[nodiscard]] std::vector<double> column(std::size_t j) const { return values_.column(j); }
  [[nodiscard]] const Matrix& values() const noexcept { return values_; }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  Matrix values_;
};

enum class TiePolicy { LiteralIndicator, MidRank };

/// Column-wise ranks in [1, n]. Stored as doubles so mid-ranks fit.
class RankMatrix {
 public:
  explicit RankMatrix(Matrix ranks) : ranks_(std::move(ranks)) {}
  [[nodiscard]] std::size_t n() const noexcept { return ranks_.rows(); }
  [[nodiscard]] std::size_t dim() const noexcept { return ranks_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return ranks_(i, j); }
  [[nodiscard]] std::vector<double> column(std::size_t j) const { return ranks_.column(j); }
  [[nodiscard]] const Matrix& values() const noexcept { return ranks_; }

  friend bool operator==(const RankMatrix&, const RankMatrix&) = default;

 private:
  Matrix ranks_;
};

namespace detail {

inline std::vector<double> rank_column(std::span<const double> x, TiePolicy policy) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && x[order[end]] == x[order[start]]) ++end;
    // R = #{k : x_k <= x_i}, which is `end` for every member of the tie group.
    const double value = policy == TiePolicy::LiteralIndicator
                             ? static_cast<double>(end)
                             : static_cast<double>(start + 1 + end) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = value;
    start = end;
  }
  return ranks;
}

// Pearson correlation of every column pair with a fixed summation order.
inline SymMatrix pearson_columns(const Matrix& x, bool throw_on_constant) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix centered(n, d);
  std::vector<double> norms(d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = x(i, j) - mean;
      centered(i, j) = c;
      ss += c * c;
    }
    if (!(ss > 0.0)) {
      if (throw_on_constant) {
        throw Error(ErrorKind::DegenerateColumn, "column " + std::to_string(j + 1) + " is constant");
      }
    }
    norms[j] = std::sqrt(ss);
  }
  Matrix r(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    r(j, j) = 1.0;
    for (std::size_t k = j + 1; k < d; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered(i, j) * centered(i, k);
      const double v = std::clamp(s / (norms[j] * norms[k]), -1.0, 1.0);
      r(j, k) = v;
      r(k, j) = v;
    }
  }
  return SymMatrix(std::move(r));
}

}  // namespace detail

/// R_ij = #{k : X_kj <= X_ij} under LiteralIndicator (max rank on ties);
/// tied groups share their average literal rank under MidRank.
inline RankMatrix compute_ranks(const DataMatrix& x, TiePolicy policy = TiePolicy::LiteralIndicator) {
  Matrix r(x.n(), x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j) {
    const auto col = x.column(j);
    r.set_column(j, detail::rank_column(col, policy));
  }
  return RankMatrix(std::move(r));
}

/// X~_ij = probit(R_ij / (n + 1)).
inline DataMatrix gaussianize(const DataMatrix& x, TiePolicy policy = TiePolicy::LiteralIndicator) {
  if (x.n() < 2) throw Error(ErrorKind::InsufficientSamples, "gaussianize needs n >= 2");
  const RankMatrix ranks = compute_ranks(x, policy);
  const double denom = static_cast<double>(x.n()) + 1.0;
  Matrix g(x.n(), x.dim());
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < x.dim(); ++j) g(i, j) = probit(ranks(i, j) / denom);
  return DataMatrix(std::move(g));
}

/// Raw second-moment matrix (1/n) sum_i X~_i X~_i^T of the Gaussianized data.
/// Not renormalized: its diagonal sits slightly below 1 for finite n.
inline SymMatrix sigma_g(const DataMatrix& x, TiePolicy policy = TiePolicy::LiteralIndicator) {
  const DataMatrix g = gaussianize(x, policy);
  const std::size_t d = g.dim();
  const double inv_n = 1.0 / static_cast<double>(g.n());
  Matrix s(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.n(); ++i) acc += g(i, j) * g(i, k);
      s(j, k) = acc * inv_n;
      s(k, j) = acc * inv_n;
    }
  return SymMatrix(std::move(s));
}

/// Spearman's rho as the Pearson correlation of the rank columns.
inline SymMatrix spearman_matrix(const DataMatrix& x, TiePolicy policy = TiePolicy::LiteralIndicator) {
  if (x.n() < 2) throw Error(ErrorKind::InsufficientSamples, "spearman needs n >= 2");
  return detail::pearson_columns(compute_ranks(x, policy).values(), true);
}

enum class KendallBackend { Auto, Naive, MergeSort };

namespace detail {

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Sum over unordered pairs of sign(dx) sign(dy).
inline std::int64_t kendall_score_naive(std::span<const double> x, std::span<const double> y) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t l = i + 1; l < x.size(); ++l) s += sign(x[i] - x[l]) * sign(y[i] - y[l]);
  return s;
}

inline std::int64_t tied_pairs(std::span<const double> sorted_values) {
  std::int64_t pairs = 0;
  std::size_t start = 0;
  while (start < sorted_values.size()) {
    std::size_t end = start + 1;
    while (end < sorted_values.size() && sorted_values[end] == sorted_values[start]) ++end;
    const auto t = static_cast<std::int64_t>(end - start);
    pairs += t * (t - 1) / 2;
    start = end;
  }
  return pairs;
}

// Sorts v ascending and returns the number of strict inversions.
inline std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                     std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      buf[k++] = v[i++];
    } else {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Knight's O(n log n) evaluation of the same pair sum.
inline std::int64_t kendall_score_merge(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  const std::int64_t x_ties = tied_pairs(xs);
  std::int64_t joint_ties = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && xs[end] == xs[start] && ys[end] == ys[start]) ++end;
    const auto t = static_cast<std::int64_t>(end - start);
    joint_ties += t * (t - 1) / 2;
    start = end;
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = count_inversions(ys, buf, 0, n);
  const std::int64_t y_ties = tied_pairs(ys);
  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  return total - x_ties - y_ties + joint_ties - 2 * swaps;
}

}  // namespace detail

/// Kendall's tau-a for every column pair: the pair-sign sum over C(n, 2).
/// Tied pairs contribute 0. Auto picks the merge-sort backend for n >= 128.
inline SymMatrix kendall_matrix(const DataMatrix& x, KendallBackend backend = KendallBackend::Auto) {
  const std::size_t n = x.n();
  if (n < 2) throw Error(ErrorKind::InsufficientSamples, "kendall needs n >= 2");
  const bool fast = backend == KendallBackend::MergeSort || (backend == KendallBackend::Auto && n >= 128);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const std::size_t d = x.dim();
  std::vector<std::vector<double>> cols(d);
  for (std::size_t j = 0; j < d; ++j) cols[j] = x.column(j);
  Matrix t(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    t(j, j) = 1.0;
    for (std::size_t k = j + 1; k < d; ++k) {
      const std::int64_t score = fast ? detail::kendall_score_merge(cols[j], cols[k])
                                      : detail::kendall_score_naive(cols[j], cols[k]);
      const double v = static_cast<double>(score) / pairs;
      t(j, k) = v;
      t(k, j) = v;
    }
  }
  return SymMatrix(std::move(t));
}

enum class RankCorrelation { Spearman, Kendall };

/// Entrywise 2 sin(pi m / 6) (Spearman) or sin(pi m / 2) (Kendall).
/// Entries of exactly +-1, including the diagonal, map to +-1 exactly.
inline SymMatrix latent_from_rank_corr(const SymMatrix& m, RankCorrelation kind) {
  const std::size_t d = m.dim();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double v = m(i, j);
      if (!(std::abs(v) <= 1.0 + 1e-12)) {
        throw Error(ErrorKind::DomainError, "rank correlation entry outside [-1, 1]");
      }
      const double c = std::clamp(v, -1.0, 1.0);
      double mapped = 0.0;
      if (i == j || std::abs(c) == 1.0) {
        mapped = i == j ? 1.0 : c;
      } else if (kind == RankCorrelation::Spearman) {
        mapped = 2.0 * std::sin(std::numbers::pi * c / 6.0);
      } else {
        mapped = std::sin(std::numbers::pi * c / 2.0);
      }
      out(i, j) = std::clamp(mapped, -1.0, 1.0);
    }
  return SymMatrix(std::move(out));
}

}  // namespace npn
