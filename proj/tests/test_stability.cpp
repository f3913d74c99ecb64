#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pumfd/stability.hpp"

using namespace pumfd;

namespace {

oracle::Dense to_oracle(const DenseMatrix& m) {
  oracle::Dense d(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) d(i, j) = m(i, j);
  return d;
}

oracle::Dense product(const oracle::Dense& a, const oracle::Dense& b) {
  oracle::Dense c(a.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j)
      for (std::size_t k = 0; k < a.n; ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

}  // namespace

TEST(Stability, AmplificationExamples) {
  EXPECT_NEAR(amplification_convdiff(-100.0, 0.5, 0.001), 0.95 / 1.05, 1e-15);
  EXPECT_NEAR(amplification_convdiff(-100.0, 0.5, 0.001), 0.90476, 1e-5);
  EXPECT_NEAR(amplification_convdiff(-1.0, 0.0, 0.001), 0.999, 1e-15);
  EXPECT_NEAR(amplification_convdiff(-3.0, 0.0, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(amplification_pseudo(-1.0, 0.5, 0.001, 1.0, 0.00025), 0.99975 / 1.00075, 1e-15);
  EXPECT_NEAR(amplification_pseudo(-1.0, 0.5, 0.001, 1.0, 0.00025), 0.99900, 1e-5);
  EXPECT_NEAR(amplification_convdiff({0.0, 10.0}, 0.5, 0.1), 1.0, 1e-15);
  EXPECT_THROW(amplification_convdiff(1.0, 1.0, 1.0), NumericalError);
}

// Property: for theta >= 1/2 every eigenvalue in the closed left half-plane is damped.
TEST(Stability, CrankNicolsonDampsLeftHalfPlane) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> re(-1e4, 0.0), im(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const Complex lam(re(gen), im(gen));
    for (double theta : {0.5, 0.75, 1.0}) {
      EXPECT_LE(amplification_convdiff(lam, theta, 0.01), 1.0 + 1e-12);
      EXPECT_LE(amplification_pseudo(lam, theta, 0.01, 1.0, 0.00025), 1.0 + 1e-12);
    }
  }
}

TEST(Stability, ExplicitBound) {
  const auto b = explicit_dt_bound({{-100.0, 0.0}, {-50.0, 3.0}});
  ASSERT_TRUE(b.value.has_value());
  EXPECT_NEAR(*b.value, 0.02, 1e-15);
  EXPECT_FALSE(explicit_dt_bound({{-1.0, 0.0}, {0.5, 0.0}}).value.has_value());
  EXPECT_FALSE(explicit_dt_bound({{0.0, 1.0}}).value.has_value());
  EXPECT_THROW(explicit_dt_bound({}), ConfigError);
  // at the bound the explicit amplification of the most negative real eigenvalue is exactly 1
  EXPECT_NEAR(amplification_convdiff(-100.0, 0.0, 0.02), 1.0, 1e-15);
}

TEST(Stability, EigenvaluesMatchBruteForce) {
  std::mt19937 gen(17);
  std::normal_distribution<double> g;
  const int n = 9;
  std::vector<Triplet> ta, tl;
  for (int i = 0; i < n; ++i) {
    ta.emplace_back(i, i, 4.0);
    for (int j = 0; j < n; ++j) {
      if (j != i && (i + j) % 3 == 0) ta.emplace_back(i, j, g(gen));
      if ((i * j + 1) % 2 == 0 || i == j) tl.emplace_back(i, j, g(gen));
    }
  }
  const SparseMatrix a = sparse_from_triplets(n, n, ta);
  const SparseMatrix l = sparse_from_triplets(n, n, tl);
  const auto got = compute_M_eigs(l, a);
  const oracle::Dense x = product(oracle::inverse(to_oracle(DenseMatrix(a))), to_oracle(DenseMatrix(l)));
  EXPECT_EQ(got.size(), 9u);
  EXPECT_LT(oracle::match_distance(got, oracle::eigenvalues(x)), 1e-8);
}

TEST(Stability, CrankNicolsonReportIsStable) {
  const NodeSet X = uniform_grid(16);
  const OperatorSet ops = assemble_all(KernelSpec(KernelFamily::IMQ, 1.35), X, Covering(2, 0.2));
  for (ProblemSpec p : {ProblemSpec{ConvDiffSpec{}}, ProblemSpec{PseudoParabolicSpec{}}}) {
    const StabilityReport r = analyze_stability(p, {0.5, 0.001, 1.0}, ops);
    EXPECT_EQ(r.eigenvalues.size(), X.size());
    EXPECT_LE(r.max_amplification, 1.0 + 1e-9);
    ASSERT_TRUE(r.spectral_radius_PinvQ.has_value());
    // rho(P^{-1} Q) equals the largest amplification factor
    EXPECT_NEAR(*r.spectral_radius_PinvQ, r.max_amplification, 1e-7);
  }
}

// Property: perturbations of the initial data do not grow under the unforced scheme.
TEST(Stability, PerturbationDoesNotGrow) {
  const NodeSet X = uniform_grid(16);
  const OperatorSet ops = assemble_all(KernelSpec(KernelFamily::IMQ, 1.35), X, Covering(2, 0.2));
  SteppingSystem sys = build_system(ConvDiffSpec{}, {0.5, 0.001, 1.0}, ops, X);
  sys.v_builder = [n = X.size()](double, double) { return Vector::Zero(static_cast<Eigen::Index>(n)); };
  const SparseLuSolver lu(sys.C);
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector e(static_cast<Eigen::Index>(X.size()));
  for (auto& v : e) v = u(gen);
  std::vector<Vector> hist;
  march(sys, lu, e, 0.001, 300, &hist);
  const double start = (sys.A * hist.front()).norm();
  for (const auto& h : hist) EXPECT_LE((sys.A * h).norm(), 10.0 * start);
}

TEST(Stability, SpectrumIndependentOfPatchOrder) {
  const NodeSet X = uniform_grid(10);
  const KernelSpec k(KernelFamily::IMQ, 1.5);
  const Covering c(2, 0.2);
  std::vector<std::size_t> rev(c.size());
  std::iota(rev.rbegin(), rev.rend(), std::size_t{0});
  const OperatorSet a = assemble_all(k, X, c);
  const OperatorSet b = assemble_all(k, X, c, {1, rev});
  const auto ea = compute_M_eigs(spatial_operator_interior(ConvDiffSpec{}, a), a.id.matrix);
  const auto eb = compute_M_eigs(spatial_operator_interior(ConvDiffSpec{}, b), b.id.matrix);
  double scale = 0.0;
  for (auto l : ea) scale = std::max(scale, std::abs(l));
  EXPECT_LT(oracle::match_distance(ea, eb), 1e-8 * scale);
}

TEST(Stability, CsvExport) {
  StabilityReport r;
  r.eigenvalues = {{-1.0, 2.0}};
  r.amplification = {0.5};
  std::ostringstream os;
  write_stability_csv(os, r);
  EXPECT_EQ(os.str(), "re_lambda,im_lambda,amplification\n-1,2,0.5\n");
}

TEST(Stability, ShapeMismatch) {
  const SparseMatrix a(3, 3), b(4, 4);
  EXPECT_THROW(compute_M_eigs(a, b), ConfigError);
}
