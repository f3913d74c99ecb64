#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <vector>

#include "pumfd/localinterp.hpp"

using namespace pumfd;

namespace {

LocalSystem patch_system(const KernelSpec& k, const NodeSet& X, const Covering& c, std::size_t j) {
  return build_local_system(k, X, c.memberships(X), j);
}

Vector sample(const std::vector<Point2>& pts, double (*f)(Point2)) {
  Vector v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(pts[i]);
  return v;
}

double quad(Point2 p) { return p.x * p.x + p.y * p.y; }
double smooth(Point2 p) { return std::sin(p.x) * std::exp(p.y); }

}  // namespace

TEST(LocalInterp, CardinalRowsAtNodesFormIdentity) {
  const NodeSet X = uniform_grid(10);
  const Covering c(2, 0.2);
  const LocalSystem ls = patch_system(KernelSpec(KernelFamily::IMQ, 2.0), X, c, 1);
  const DenseMatrix rows = ls.operator_rows(OpKind::Id, ls.nodes());
  const auto n = static_cast<Eigen::Index>(ls.size());
  EXPECT_LT((rows - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(ls.factor_kind(), FactorKind::Cholesky);
}

// Independent oracle: explicit inverse of the kernel matrix via full-pivot LU.
TEST(LocalInterp, OperatorRowsMatchExplicitInverse) {
  const NodeSet X = halton_node_set(12);
  const Covering c(2, 0.2);
  const KernelSpec k(KernelFamily::GA, 4.0);
  const LocalSystem ls = patch_system(k, X, c, 2);
  const DenseMatrix ainv = kernel_matrix(k, ls.nodes(), ls.nodes()).fullPivLu().inverse();
  const std::vector<Point2> probes{{0.3, 0.7}, {0.1, 0.9}, {0.45, 0.55}};
  for (auto op : {OpKind::Id, OpKind::Lap, OpKind::Dx, OpKind::Dy}) {
    const DenseMatrix rows = ls.operator_rows(op, probes);
    const DenseMatrix expect = kernel_matrix(k, probes, ls.nodes(), op) * ainv;
    EXPECT_LT((rows - expect).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, expect.cwiseAbs().maxCoeff()))
        << to_string(op);
  }
}

TEST(LocalInterp, LaplacianOfQuadratic) {
  const NodeSet X = uniform_grid(16);
  const Covering c(1, 0.2);
  const LocalSystem ls = patch_system(KernelSpec(KernelFamily::IMQ, 2.0), X, c, 0);
  const std::vector<Point2> probes{{0.5, 0.5}, {0.3, 0.6}, {0.7, 0.25}};
  const Vector lap = ls.operator_rows(OpKind::Lap, probes) * sample(ls.nodes(), quad);
  for (Eigen::Index i = 0; i < lap.size(); ++i) EXPECT_NEAR(lap[i], 4.0, 5e-3);
}

TEST(LocalInterp, GradientOfSmoothFunction) {
  const NodeSet X = uniform_grid(16);
  const Covering c(1, 0.2);
  const LocalSystem ls = patch_system(KernelSpec(KernelFamily::IMQ, 2.0), X, c, 0);
  const Point2 p{0.4, 0.55};
  const std::vector<Point2> probe{p};
  const Vector u = sample(ls.nodes(), smooth);
  EXPECT_NEAR((ls.operator_rows(OpKind::Dx, probe) * u)[0], std::cos(p.x) * std::exp(p.y), 5e-5);
  EXPECT_NEAR((ls.operator_rows(OpKind::Dy, probe) * u)[0], smooth(p), 5e-5);
}

TEST(LocalInterp, CoefficientsReproduceData) {
  const NodeSet X = uniform_grid(8);
  const Covering c(1, 0.2);
  const KernelSpec k(KernelFamily::M4, 3.0);
  const LocalSystem ls = patch_system(k, X, c, 0);
  const Vector u = sample(ls.nodes(), smooth);
  const Vector alpha = ls.coefficients(u);
  const Vector back = kernel_matrix(k, ls.nodes(), ls.nodes()) * alpha;
  EXPECT_LT((back - u).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LocalInterp, TpsReproducesLinearPolynomials) {
  const auto pts = halton_2d(25);
  std::vector<double> vals;
  for (auto p : pts) vals.push_back(2.0 - 3.0 * p.x + 0.5 * p.y);
  const auto s = augmented_interpolate(KernelSpec(KernelFamily::TPS, 1.0, 1), pts, vals, 2);
  for (Point2 q : {Point2{0.2, 0.2}, Point2{0.77, 0.1}, Point2{0.5, 0.95}})
    EXPECT_NEAR(s(q), 2.0 - 3.0 * q.x + 0.5 * q.y, 1e-9);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(s(pts[i]), vals[i], 1e-9);
  // moment conditions P^T alpha = 0
  double m0 = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m0 += s.alpha[static_cast<Eigen::Index>(i)];
    mx += s.alpha[static_cast<Eigen::Index>(i)] * pts[i].x;
    my += s.alpha[static_cast<Eigen::Index>(i)] * pts[i].y;
  }
  EXPECT_NEAR(m0, 0.0, 1e-9);
  EXPECT_NEAR(mx, 0.0, 1e-9);
  EXPECT_NEAR(my, 0.0, 1e-9);
}

TEST(LocalInterp, MultiquadricInterpolatesWithConstant) {
  const auto pts = halton_2d(20);
  std::vector<double> vals;
  for (auto p : pts) vals.push_back(smooth(p));
  const auto s = augmented_interpolate(KernelSpec(KernelFamily::MQ, 2.0), pts, vals, 1);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(s(pts[i]), vals[i], 1e-9);
}

TEST(LocalInterp, CollinearNodesAreNotUnisolvent) {
  std::vector<Point2> pts;
  std::vector<double> vals;
  for (int i = 0; i < 6; ++i) {
    pts.push_back({0.1 * i, 0.1 * i});
    vals.push_back(i);
  }
  EXPECT_THROW(augmented_interpolate(KernelSpec(KernelFamily::TPS, 1.0, 1), pts, vals, 2), UnisolvencyError);
}

TEST(LocalInterp, PolynomialOrderTooLow) {
  const auto pts = halton_2d(10);
  const std::vector<double> vals(10, 1.0);
  EXPECT_THROW(augmented_interpolate(KernelSpec(KernelFamily::TPS, 1.0, 1), pts, vals, 1), ConfigError);
  EXPECT_THROW(augmented_interpolate(KernelSpec(KernelFamily::MQ, 1.0), pts, vals, 0), ConfigError);
}

TEST(LocalInterp, Monomials) {
  const auto m = monomials({2.0, 3.0}, 2);
  const std::vector<double> expect{1, 2, 3, 4, 6, 9};
  EXPECT_EQ(m, expect);
}
