#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pumfd/errors.hpp"

namespace pumfd {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using Triplet = Eigen::Triplet<double>;

/// Compressed-row sparse matrix; column indices sorted and unique per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

inline SparseMatrix sparse_from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());  // duplicates summed
  m.makeCompressed();
  return m;
}

inline double norm1(const SparseMatrix& m) {
  Vector colsum = Vector::Zero(m.cols());
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) colsum[it.col()] += std::abs(it.value());
  return m.cols() ? colsum.maxCoeff() : 0.0;
}

inline double norm1(const DenseMatrix& m) {
  return m.cols() ? m.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
}

// ---------------------------------------------------------------------------
// Condition estimation

/// Hager's estimate of ||A^{-1}||_1 with Higham's extra test vector, using
/// only solves with A and A^T.
inline double inverse_norm1_estimate(int n, const std::function<Vector(const Vector&)>& solve,
                                     const std::function<Vector(const Vector&)>& solve_transpose) {
  if (n == 0) return 0.0;
  Vector x = Vector::Constant(n, 1.0 / n);
  double est = 0.0;
  int last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Vector y = solve(x);
    const double y_norm = y.lpNorm<1>();
    if (iter > 0 && y_norm <= est) break;
    est = y_norm;
    Vector xi(n);
    for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    const Vector z = solve_transpose(xi);
    int j = 0;
    z.cwiseAbs().maxCoeff(&j);
    if (std::abs(z[j]) <= z.dot(x) || j == last_j) break;
    last_j = j;
    x.setZero();
    x[j] = 1.0;
  }
  Vector alt(n);
  for (int i = 0; i < n; ++i)
    alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / std::max(1, n - 1));
  const double alt_est = 2.0 * solve(alt).lpNorm<1>() / (3.0 * n);
  return std::max(est, alt_est);
}

// ---------------------------------------------------------------------------
// Dense factorization

enum class FactorKind { Cholesky, PivotedLU };

inline double kMinRcond = 1e-300;

/// Symmetric dense factorization: Cholesky first, pivoted LU if that fails.
class DenseFactorization {
 public:
  DenseFactorization() = default;

  /// Throws IllConditionedError when the reciprocal condition estimate drops
  /// below `min_rcond`.
  explicit DenseFactorization(const DenseMatrix& a, bool try_cholesky = true,
                              double min_rcond = kMinRcond)
      : n_(static_cast<int>(a.rows())) {
    if (a.rows() != a.cols()) throw ConfigError("dense factorization needs a square matrix");
    if (try_cholesky) {
      llt_.compute(a);
      if (llt_.info() == Eigen::Success) {
        kind_ = FactorKind::Cholesky;
        rcond_ = llt_.rcond();
        if (rcond_ >= min_rcond) return;
      }
    }
    lu_.compute(a);
    kind_ = FactorKind::PivotedLU;
    rcond_ = lu_.rcond();
    if (!(rcond_ >= min_rcond)) {
      std::ostringstream msg;
      msg << "matrix numerically singular (1-norm condition estimate " << 1.0 / rcond_ << ")";
      throw IllConditionedError(msg.str(), 1.0 / rcond_);
    }
  }

  FactorKind kind() const { return kind_; }
  int size() const { return n_; }
  double cond_estimate() const { return 1.0 / rcond_; }

  template <typename Rhs>
  DenseMatrix solve(const Eigen::MatrixBase<Rhs>& b) const {
    if (kind_ == FactorKind::Cholesky) return llt_.solve(b);
    return lu_.solve(b);
  }

 private:
  int n_ = 0;
  FactorKind kind_ = FactorKind::Cholesky;
  double rcond_ = 1.0;
  Eigen::LLT<DenseMatrix> llt_;
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

// ---------------------------------------------------------------------------
// Sparse direct solve

/// Sparse LU with COLAMD column ordering and threshold partial pivoting.
/// Factor once, solve many times.
class SparseLuSolver {
 public:
  explicit SparseLuSolver(const SparseMatrix& a) : a_(a), norm1_(norm1(a)) {
    if (a.rows() != a.cols()) throw ConfigError("sparse LU needs a square matrix");
    lu_.analyzePattern(a_);
    lu_.factorize(a_);
    if (lu_.info() != Eigen::Success)
      throw NumericalError("sparse LU failed: " + lu_.lastErrorMessage());
  }

  SparseLuSolver(const SparseLuSolver&) = delete;
  SparseLuSolver& operator=(const SparseLuSolver&) = delete;

  int size() const { return static_cast<int>(a_.rows()); }

  Vector solve(const Vector& b) const {
    Vector x = lu_.solve(b);
    return x;
  }

  Vector solve_transpose(const Vector& b) const {
    Vector x = const_cast<Lu&>(lu_).transpose().solve(b);
    return x;
  }

  /// ||A||_1 times Hager's estimate of ||A^{-1}||_1.
  double cond_estimate_1norm() const {
    return norm1_ * inverse_norm1_estimate(
                        size(), [this](const Vector& v) { return solve(v); },
                        [this](const Vector& v) { return solve_transpose(v); });
  }

 private:
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using Lu = Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>;
  ColMajor a_;
  double norm1_;
  Lu lu_;
};

/// Condition estimate of a dense matrix via the same estimator.
inline double cond_estimate_1norm(const DenseMatrix& a) {
  Eigen::PartialPivLU<DenseMatrix> lu(a);
  const int n = static_cast<int>(a.rows());
  return norm1(a) * inverse_norm1_estimate(
                        n, [&](const Vector& v) -> Vector { return lu.solve(v); },
                        [&](const Vector& v) -> Vector { return lu.transpose().solve(v); });
}

// ---------------------------------------------------------------------------
// Eigenvalues

inline constexpr int kMaxDenseEigenSize = 4096;

/// All eigenvalues of a general real matrix (Hessenberg reduction + shifted QR).
inline std::vector<std::complex<double>> dense_eigenvalues(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("eigenvalues need a square matrix");
  if (m.rows() > kMaxDenseEigenSize)
    throw ConfigError("dense eigenvalue problem of size " + std::to_string(m.rows()) +
                      " exceeds the limit " + std::to_string(kMaxDenseEigenSize));
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<DenseMatrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("QR iteration did not converge");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// ---------------------------------------------------------------------------
// Matrix Market coordinate format

inline void write_matrix_market(std::ostream& os, const SparseMatrix& m) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

inline SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw ConfigError("not a Matrix Market file");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate")
    throw ConfigError("only coordinate Matrix Market matrices are supported");
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";
  while (std::getline(is, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream dims(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(dims >> rows >> cols >> nnz)) throw ConfigError("bad Matrix Market size line");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 1.0;
    if (!(is >> i >> j)) throw ConfigError("truncated Matrix Market body");
    if (!pattern && !(is >> v)) throw ConfigError("truncated Matrix Market body");
    if (i < 1 || j < 1 || i > rows || j > cols) throw ConfigError("Matrix Market index out of range");
    t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (symmetric && i != j) t.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
  }
  return sparse_from_triplets(static_cast<int>(rows), static_cast<int>(cols), t);
}

}  // namespace pumfd
