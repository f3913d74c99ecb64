#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pumfd/assembly.hpp"

using namespace pumfd;

namespace {

Vector sample(const NodeSet& X, double (*f)(Point2)) {
  Vector v(static_cast<Eigen::Index>(X.size()));
  for (std::size_t i = 0; i < X.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(X[i]);
  return v;
}

double quad(Point2 p) { return p.x * p.x + p.y * p.y; }
double px(Point2 p) { return p.x; }

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

}  // namespace

TEST(Assembly, IdentityOperatorIsIdentity) {
  const NodeSet X = uniform_grid(16);
  for (int m : {2, 4}) {
    const GlobalOperator id = assemble(OpKind::Id, KernelSpec(KernelFamily::IMQ, 2.0), X, Covering(m, 0.2));
    SparseMatrix eye(id.matrix.rows(), id.matrix.cols());
    eye.setIdentity();
    EXPECT_LT(max_abs(id.matrix - eye), 1e-10) << "m=" << m;
  }
}

TEST(Assembly, OperatorsOnPolynomials) {
  const NodeSet X = uniform_grid(24);
  const OperatorSet ops = assemble_all(KernelSpec(KernelFamily::IMQ, 1.5), X, Covering(3, 0.2));
  const Vector lap = ops.lap.matrix * sample(X, quad);
  const Vector dx = ops.dx.matrix * sample(X, px);
  const Vector dy = ops.dy.matrix * sample(X, px);
  double e_lap = 0, e_dx = 0, e_dy = 0;
  for (auto i : X.interior()) {
    const auto k = static_cast<Eigen::Index>(i);
    e_lap = std::max(e_lap, std::abs(lap[k] - 4.0));
    e_dx = std::max(e_dx, std::abs(dx[k] - 1.0));
    e_dy = std::max(e_dy, std::abs(dy[k]));
  }
  EXPECT_LT(e_lap, 5e-3);
  EXPECT_LT(e_dx, 1e-4);
  EXPECT_LT(e_dy, 1e-4);
}

// Property: at fixed eps and covering, derivatives of a constant shrink under refinement.
TEST(Assembly, RefinementImprovesConsistency) {
  const KernelSpec k(KernelFamily::IMQ, 2.0);
  double prev_lap = 1e300, prev_dx = 1e300;
  for (int n : {12, 16, 24}) {
    const NodeSet X = uniform_grid(n);
    const OperatorSet ops = assemble_all(k, X, Covering(2, 0.2));
    const Vector one = Vector::Ones(static_cast<Eigen::Index>(X.size()));
    const double lap = (ops.lap.matrix * one).cwiseAbs().maxCoeff();
    const double dx = (ops.dx.matrix * one).cwiseAbs().maxCoeff();
    EXPECT_LT(lap, prev_lap) << "n=" << n;
    EXPECT_LT(dx, prev_dx) << "n=" << n;
    prev_lap = lap;
    prev_dx = dx;
  }
}

TEST(Assembly, LaplacianIsNotSymmetric) {
  const NodeSet X = uniform_grid(12);
  const GlobalOperator lap = assemble(OpKind::Lap, KernelSpec(KernelFamily::IMQ, 2.0), X, Covering(2, 0.2));
  const SparseMatrix t = lap.matrix.transpose();
  EXPECT_GT(max_abs(lap.matrix - t), 1e-6);
}

TEST(Assembly, RestrictRows) {
  const NodeSet X = uniform_grid(10);
  const GlobalOperator lap = assemble(OpKind::Lap, KernelSpec(KernelFamily::IMQ, 2.0), X, Covering(2, 0.2));
  const SparseMatrix in = interior_rows(lap);
  const SparseMatrix bd = boundary_rows(lap);
  EXPECT_EQ(in.rows(), lap.matrix.rows());
  EXPECT_EQ(in.nonZeros() + bd.nonZeros(), lap.matrix.nonZeros());
  EXPECT_LT(max_abs(in + bd - lap.matrix), 1e-15);
  for (auto i : X.boundary()) EXPECT_EQ(in.row(static_cast<int>(i)).nonZeros(), 0);
  const std::vector<std::size_t> bad{1000};
  EXPECT_THROW(restrict_rows(lap.matrix, bad), ConfigError);
}

TEST(Assembly, MorePatchesMeansFewerNonzeros) {
  const NodeSet X = uniform_grid(24);
  const KernelSpec k(KernelFamily::IMQ, 2.0);
  long prev = -1;
  for (int m : {3, 4, 5}) {
    const long nnz = sparsity_report(assemble(OpKind::Lap, k, X, Covering(m, 0.2))).nnz;
    if (prev >= 0) {
      EXPECT_LT(nnz, prev) << "m=" << m;
    }
    prev = nnz;
  }
  EXPECT_LT(assemble(OpKind::Lap, k, uniform_grid(12), Covering(5, 0.2)).matrix.nonZeros(),
            assemble(OpKind::Lap, k, uniform_grid(12), Covering(3, 0.2)).matrix.nonZeros());
}

TEST(Assembly, SparsityReportOnKnownMatrix) {
  const SparseMatrix m = sparse_from_triplets(3, 3, {{0, 0, 1}, {0, 2, 1}, {1, 1, 1}, {2, 1, 1}});
  const SparsityReport r = sparsity_report(m);
  EXPECT_EQ(r.nnz, 4);
  EXPECT_NEAR(r.density, 4.0 / 9.0, 1e-15);
  EXPECT_EQ(r.max_bandwidth, 2);
  EXPECT_NEAR(r.mean_row_bandwidth, 1.0, 1e-15);
  EXPECT_EQ(r.row_nnz, (std::vector<long>{2, 1, 1}));
}

TEST(Assembly, WorkerCountDoesNotChangeResult) {
  const NodeSet X = halton_node_set(14);
  const KernelSpec k(KernelFamily::IMQ, 1.5);
  const Covering c(3, 0.2);
  const OperatorSet a = assemble_all(k, X, c, {1, {}});
  const OperatorSet b = assemble_all(k, X, c, {3, {}});
  EXPECT_EQ(DenseMatrix(a.lap.matrix), DenseMatrix(b.lap.matrix));
  EXPECT_EQ(DenseMatrix(a.dx.matrix), DenseMatrix(b.dx.matrix));
}

TEST(Assembly, PatchOrderOnlyAffectsRoundoff) {
  const NodeSet X = uniform_grid(12);
  const KernelSpec k(KernelFamily::IMQ, 2.0);
  const Covering c(3, 0.2);
  std::vector<std::size_t> rev(c.size());
  std::iota(rev.rbegin(), rev.rend(), std::size_t{0});
  const OperatorSet a = assemble_all(k, X, c);
  const OperatorSet b = assemble_all(k, X, c, {1, rev});
  EXPECT_LT(max_abs(a.lap.matrix - b.lap.matrix), 1e-9 * max_abs(a.lap.matrix));
  const std::vector<std::size_t> short_order{0, 1};
  EXPECT_THROW(assemble_all(k, X, c, {1, short_order}), ConfigError);
}

TEST(Assembly, NodeSplitRecorded) {
  const NodeSet X = uniform_grid(8);
  const OperatorSet ops = assemble_all(KernelSpec(KernelFamily::IMQ, 2.0), X, Covering(2, 0.2));
  EXPECT_EQ(ops.lap.interior.size(), 36u);
  EXPECT_EQ(ops.lap.boundary.size(), 28u);
  EXPECT_EQ(ops.lu_fallback_patches, 0u);
  EXPECT_GT(ops.max_local_cond, 1.0);
}
