#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npn/error.hpp"

namespace npn {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) {
        throw Error(ErrorKind::DomainError, "ragged matrix initializer");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  [[nodiscard]] std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }

  [[nodiscard]] Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::DomainError, "matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

/// Square symmetric matrix. Construction symmetrizes the input as (A + A^T) / 2,
/// so entries(i, j) == entries(j, i) holds bit-exactly afterwards.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
      throw Error(ErrorKind::DomainError, "symmetric matrix must be square with dim >= 1");
    }
    const std::size_t d = m_.rows();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const double avg = (m_(i, j) + m_(j, i)) / 2.0;
        m_(i, j) = avg;
        m_(j, i) = avg;
      }
  }
  SymMatrix(std::initializer_list<std::initializer_list<double>> init) : SymMatrix(Matrix(init)) {}

  static SymMatrix identity(std::size_t dim) { return SymMatrix(Matrix::identity(dim)); }

  [[nodiscard]] std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

/// Symmetric matrix with unit diagonal and entries in [-1, 1].
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(SymMatrix base) : base_(std::move(base)) {
    const std::size_t d = base_.dim();
    for (std::size_t i = 0; i < d; ++i) {
      if (std::abs(base_(i, i) - 1.0) > 1e-12) {
        throw Error(ErrorKind::DomainError, "correlation matrix diagonal must equal 1");
      }
      for (std::size_t j = 0; j < d; ++j) {
        if (!(std::abs(base_(i, j)) <= 1.0)) {
          throw Error(ErrorKind::DomainError, "correlation entries must lie in [-1, 1]");
        }
      }
    }
  }

  /// The 2x2 matrix [[1, sigma], [sigma, 1]].
  static CorrelationMatrix bivariate(double sigma) {
    return CorrelationMatrix(SymMatrix{{1.0, sigma}, {sigma, 1.0}});
  }

  [[nodiscard]] std::size_t dim() const noexcept { return base_.dim(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return base_(i, j); }
  [[nodiscard]] const SymMatrix& sym() const noexcept { return base_; }

 private:
  SymMatrix base_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // nonincreasing
  Matrix eigenvectors;              // columns

  [[nodiscard]] double min_eigenvalue() const { return eigenvalues.back(); }
};

/// Lower-triangular Cholesky factor L with A = L L^T.
inline Matrix cholesky_factor(const SymMatrix& a) {
  const std::size_t d = a.dim();
  Matrix l(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "Cholesky pivot " + std::to_string(j) + " is not positive");
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// log|A| = 2 * sum_j log(L_jj).
inline double cholesky_logdet(const SymMatrix& a) {
  const Matrix l = cholesky_factor(a);
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) s += std::log(l(j, j));
  return 2.0 * s;
}

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal mass is negligible
/// relative to the Frobenius norm, capped at 100 * D sweeps.
inline EigenDecomposition sym_eigen(const SymMatrix& input) {
  const std::size_t d = input.dim();
  Matrix a = input.matrix();
  Matrix v = Matrix::identity(d);

  const double scale = std::max(frobenius_norm(a), 1e-300);
  const std::size_t max_sweeps = 100 * d;
  bool converged = d == 1;
  for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) > 1e-10 * scale) {
      throw Error(ErrorKind::NoConvergence, "Jacobi sweeps exhausted");
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t c = 0; c < d; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < d; ++r) out.eigenvectors(r, c) = v(r, order[c]);
  }
  return out;
}

/// Q diag(values) Q^T.
inline SymMatrix reconstruct(const Matrix& q, std::span<const double> values) {
  const std::size_t d = q.rows();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += q(i, k) * values[k] * q(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  return SymMatrix(std::move(out));
}

struct ConeProjection {
  SymMatrix matrix;
  double min_eigenvalue_before;
  std::size_t clamped;
};

/// Frobenius projection onto {B symmetric : lambda_min(B) >= z}, with diagnostics.
inline ConeProjection project_to_cone_detailed(const SymMatrix& a, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::DomainError, "cone floor z must be positive");
  const EigenDecomposition eig = sym_eigen(a);
  std::vector<double> clamped = eig.eigenvalues;
  std::size_t count = 0;
  for (double& lambda : clamped) {
    if (lambda < z) {
      lambda = z;
      ++count;
    }
  }
  if (count == 0) return {a, eig.min_eigenvalue(), 0};
  return {reconstruct(eig.eigenvectors, clamped), eig.min_eigenvalue(), count};
}

inline SymMatrix project_to_cone(const SymMatrix& a, double z) {
  return project_to_cone_detailed(a, z).matrix;
}

struct EigenBounds {
  double lower;
  double upper;
};

/// Gershgorin bounds on the spectrum of any c-bandable correlation matrix.
/// The lower bound is positive only for c < 1/3. The dimension does not
/// enter the bounds; it is validated only.
inline EigenBounds bandable_eigen_bounds(double c, std::size_t dim) {
  if (!(c > 0.0 && c < 1.0)) throw Error(ErrorKind::DomainError, "bandable c must lie in (0, 1)");
  if (dim == 0) throw Error(ErrorKind::DomainError, "dimension must be positive");
  return {(1.0 - 3.0 * c) / (1.0 - c), (1.0 + c) / (1.0 - c)};
}

inline bool is_bandable(const CorrelationMatrix& a, double c) {
  if (!(c > 0.0 && c < 1.0)) throw Error(ErrorKind::DomainError, "bandable c must lie in (0, 1)");
  const std::size_t d = a.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const auto gap = static_cast<double>(i > j ? i - j : j - i);
      if (std::abs(a(i, j)) > std::pow(c, gap) + 1e-12) return false;
    }
  return true;
}

}  // namespace npn
