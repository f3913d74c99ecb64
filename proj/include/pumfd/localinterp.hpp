#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pumfd/covering.hpp"
#include "pumfd/errors.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/linalg.hpp"
#include "pumfd/points.hpp"

namespace pumfd {

/// Differential operators understood by the local and global assembly.
enum class OpKind { Id, Lap, Dx, Dy };

inline std::string to_string(OpKind op) {
  switch (op) {
    case OpKind::Id: return "id";
    case OpKind::Lap: return "lap";
    case OpKind::Dx: return "dx";
    case OpKind::Dy: return "dy";
  }
  return "?";
}

/// Value of `op` applied to x -> phi(|x - c|) at x = p.
inline double apply_op(const KernelSpec& k, OpKind op, Point2 p, Point2 c) {
  const Point2 d = p - c;
  const double r = norm(d);
  switch (op) {
    case OpKind::Id: return eval(k, r);
    case OpKind::Lap: return laplacian(k, r, 2);
    case OpKind::Dx: return grad_factor(k, r) * d.x;
    case OpKind::Dy: return grad_factor(k, r) * d.y;
  }
  return 0.0;
}

/// Kernel matrix [phi(|a_i - b_k|)] of shape |a| x |b|.
inline DenseMatrix kernel_matrix(const KernelSpec& k, std::span<const Point2> a,
                                 std::span<const Point2> b, OpKind op = OpKind::Id) {
  DenseMatrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = apply_op(k, op, a[i], b[j]);
  return m;
}

/// One patch's interpolation matrix A_j with its factorization.
class LocalSystem {
 public:
  LocalSystem(const KernelSpec& k, std::size_t patch, std::vector<std::size_t> node_ids,
              std::vector<Point2> nodes)
      : kernel_(k), patch_(patch), node_ids_(std::move(node_ids)), nodes_(std::move(nodes)) {
    const DenseMatrix a = kernel_matrix(k, nodes_, nodes_);
    try {
      factor_ = DenseFactorization(a, is_positive_definite(k.family));
    } catch (const IllConditionedError& e) {
      throw IllConditionedError("patch " + std::to_string(patch) + ": " + e.what(),
                                e.cond_estimate());
    }
  }

  std::size_t patch() const { return patch_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::size_t>& node_ids() const { return node_ids_; }
  const std::vector<Point2>& nodes() const { return nodes_; }
  const KernelSpec& kernel() const { return kernel_; }
  FactorKind factor_kind() const { return factor_.kind(); }
  double cond_estimate() const { return factor_.cond_estimate(); }

  /// Rows of op(psi_k)(p_i): the |eval_points| x N_j matrix Phi_op^T A_j^{-1},
  /// obtained by solving with the cached factorization.
  DenseMatrix operator_rows(OpKind op, std::span<const Point2> eval_points) const {
    // op acts on the evaluation point: column i holds (op phi)(|p_i - x_k|)
    DenseMatrix rhs(nodes_.size(), eval_points.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      for (std::size_t i = 0; i < eval_points.size(); ++i)
        rhs(k, i) = apply_op(kernel_, op, eval_points[i], nodes_[k]);
    return factor_.solve(rhs).transpose();
  }

  /// Coefficients of the interpolant of `values` at the patch nodes.
  Vector coefficients(const Vector& values) const { return factor_.solve(values); }

 private:
  KernelSpec kernel_;
  std::size_t patch_;
  std::vector<std::size_t> node_ids_;
  std::vector<Point2> nodes_;
  DenseFactorization factor_;
};

inline LocalSystem build_local_system(const KernelSpec& k, const NodeSet& X,
                                      const Memberships& m, std::size_t patch) {
  const auto& ids = m.nodes_of_patch.at(patch);
  if (ids.size() < kMinLocalNodes)
    throw ConfigError("patch " + std::to_string(patch) + " has too few nodes");
  std::vector<Point2> pts;
  pts.reserve(ids.size());
  for (auto i : ids) pts.push_back(X[i]);
  return LocalSystem(k, patch, ids, std::move(pts));
}

// ---------------------------------------------------------------------------
// Polynomial-augmented interpolation for conditionally positive definite kernels

/// Monomials x^a y^b with a + b <= degree, ordered by total degree.
inline std::vector<double> monomials(Point2 p, int degree) {
  std::vector<double> out;
  for (int total = 0; total <= degree; ++total)
    for (int b = 0; b <= total; ++b) out.push_back(std::pow(p.x, total - b) * std::pow(p.y, b));
  return out;
}

struct AugmentedInterpolant {
  KernelSpec kernel;
  std::vector<Point2> centers;
  int order = 0;  // polynomials of total degree <= order - 1
  Vector alpha;
  Vector beta;

  double operator()(Point2 x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < centers.size(); ++j) s += alpha[j] * eval(kernel, distance(x, centers[j]));
    if (order > 0) {
      const auto p = monomials(x, order - 1);
      for (std::size_t q = 0; q < p.size(); ++q) s += beta[q] * p[q];
    }
    return s;
  }
};

/// Solves [[A, P], [P^T, 0]] [alpha; beta] = [u; 0] with P spanning polynomials
/// of total degree <= order - 1.
inline AugmentedInterpolant augmented_interpolate(const KernelSpec& k, std::span<const Point2> X,
                                                  std::span<const double> values, int order) {
  if (X.size() != values.size()) throw ConfigError("node and value counts differ");
  if (order < cpd_order(k))
    throw ConfigError("kernel " + std::string(to_string(k.family)) + " needs polynomial order >= " +
                      std::to_string(cpd_order(k)));
  const auto n = static_cast<Eigen::Index>(X.size());
  const Eigen::Index q = order > 0 ? static_cast<Eigen::Index>(order * (order + 1) / 2) : 0;

  DenseMatrix P(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (q == 0) break;
    const auto row = monomials(X[i], order - 1);
    for (Eigen::Index c = 0; c < q; ++c) P(i, c) = row[c];
  }
  if (q > 0) {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(P);
    qr.setThreshold(1e-10);
    if (qr.rank() < q)
      throw UnisolvencyError("node set is not unisolvent for polynomials of degree " +
                             std::to_string(order - 1));
  }

  DenseMatrix block = DenseMatrix::Zero(n + q, n + q);
  block.topLeftCorner(n, n) = kernel_matrix(k, X, X);
  block.topRightCorner(n, q) = P;
  block.bottomLeftCorner(q, n) = P.transpose();
  Vector rhs = Vector::Zero(n + q);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = values[i];

  Eigen::FullPivLU<DenseMatrix> lu(block);
  if (!lu.isInvertible()) throw NumericalError("augmented interpolation system is singular");
  const Vector sol = lu.solve(rhs);

  AugmentedInterpolant out;
  out.kernel = k;
  out.centers.assign(X.begin(), X.end());
  out.order = order;
  out.alpha = sol.head(n);
  out.beta = sol.tail(q);
  return out;
}

}  // namespace pumfd
