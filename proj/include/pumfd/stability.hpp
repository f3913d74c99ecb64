#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pumfd/assembly.hpp"
#include "pumfd/errors.hpp"
#include "pumfd/linalg.hpp"
#include "pumfd/pde.hpp"

namespace pumfd {

using Complex = std::complex<double>;

/// Eigenvalues of the generalized problem (L A_I) s = lambda A s, reduced to the
/// standard problem for X = A^{-1} (L A_I) by a dense solve with A.
inline std::vector<Complex> compute_M_eigs(const SparseMatrix& l_interior, const SparseMatrix& a) {
  if (a.rows() != a.cols() || l_interior.rows() != a.rows() || l_interior.cols() != a.cols())
    throw ConfigError("compute_M_eigs: shape mismatch");
  if (a.rows() > kMaxDenseEigenSize)
    throw ConfigError("stability analysis limited to N <= " + std::to_string(kMaxDenseEigenSize));
  const DenseMatrix ad(a);
  Eigen::PartialPivLU<DenseMatrix> lu(ad);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("matrix A is numerically singular");
  const DenseMatrix x = lu.solve(DenseMatrix(l_interior));
  return dense_eigenvalues(x);
}

namespace detail {
inline double modulus_ratio(Complex num, Complex den) {
  if (std::abs(den) == 0.0) throw NumericalError("singular amplification: denominator vanishes");
  return std::abs(num) / std::abs(den);
}
}  // namespace detail

/// |1 + (1-theta) dt lambda| / |1 - theta dt lambda|
inline double amplification_convdiff(Complex lam, double theta, double dt) {
  return detail::modulus_ratio(1.0 + (1.0 - theta) * dt * lam, 1.0 - theta * dt * lam);
}

/// |1 + ((1-theta) dt alpha - beta) lambda| / |1 - (theta dt alpha + beta) lambda|
inline double amplification_pseudo(Complex lam, double theta, double dt, double alpha, double beta) {
  return detail::modulus_ratio(1.0 + ((1.0 - theta) * dt * alpha - beta) * lam,
                               1.0 - (theta * dt * alpha + beta) * lam);
}

struct DtBound {
  std::optional<double> value;
  std::string reason;
};

/// Largest stable explicit step, -2 / min Re(lambda), when the spectrum lies in
/// the closed left half-plane. `tolerance` is relative to max |lambda|.
inline DtBound explicit_dt_bound(const std::vector<Complex>& eigs, double tolerance = 1e-8) {
  if (eigs.empty()) throw ConfigError("explicit_dt_bound needs at least one eigenvalue");
  double max_abs = 0.0;
  double min_re = 0.0;
  double max_re = -std::numeric_limits<double>::infinity();
  for (const auto& l : eigs) {
    max_abs = std::max(max_abs, std::abs(l));
    min_re = std::min(min_re, l.real());
    max_re = std::max(max_re, l.real());
  }
  if (max_re > tolerance * max_abs) return {std::nullopt, "eigenvalue with positive real part"};
  if (!(min_re < 0.0)) return {std::nullopt, "no eigenvalue with negative real part; step unbounded"};
  return {-2.0 / min_re, ""};
}

struct StabilityReport {
  std::vector<Complex> eigenvalues;
  std::vector<double> amplification;
  double max_amplification = 0.0;
  double max_real_part = 0.0;
  DtBound explicit_bound;
  std::optional<double> spectral_radius_PinvQ;  // direct value, small instances only
};

inline constexpr Eigen::Index kDirectSpectralRadiusLimit = 1600;

/// Full analysis for one configuration: eigenvalues of M, per-eigenvalue
/// amplification for the problem's scheme, explicit bound and (when N is
/// small) the spectral radius of P^{-1} Q computed directly.
inline StabilityReport analyze_stability(const ProblemSpec& problem, const TimeScheme& scheme,
                                         const OperatorSet& ops) {
  scheme.validate();
  const SparseMatrix l = spatial_operator_interior(problem, ops);
  StabilityReport r;
  r.eigenvalues = compute_M_eigs(l, ops.id.matrix);
  r.max_real_part = -std::numeric_limits<double>::infinity();
  const auto* pp = std::get_if<PseudoParabolicSpec>(&problem);
  for (const auto& lam : r.eigenvalues) {
    const double g = pp ? amplification_pseudo(lam, scheme.theta, scheme.dt, pp->alpha, pp->beta)
                        : amplification_convdiff(lam, scheme.theta, scheme.dt);
    r.amplification.push_back(g);
    r.max_amplification = std::max(r.max_amplification, g);
    r.max_real_part = std::max(r.max_real_part, lam.real());
  }
  r.explicit_bound = explicit_dt_bound(r.eigenvalues);

  const Eigen::Index n = ops.id.matrix.rows();
  if (n <= kDirectSpectralRadiusLimit) {
    // M = L A_I A^{-1}; P = I - p M, Q = I + q M
    const DenseMatrix ad(ops.id.matrix);
    const DenseMatrix m = DenseMatrix(l) * ad.inverse();
    double p = scheme.theta * scheme.dt;
    double q = (1.0 - scheme.theta) * scheme.dt;
    if (pp) {
      p = scheme.theta * scheme.dt * pp->alpha + pp->beta;
      q = (1.0 - scheme.theta) * scheme.dt * pp->alpha - pp->beta;
    }
    const DenseMatrix I = DenseMatrix::Identity(n, n);
    const DenseMatrix k = (I - p * m).partialPivLu().solve(I + q * m);
    double rho = 0.0;
    for (const auto& ev : dense_eigenvalues(k)) rho = std::max(rho, std::abs(ev));
    r.spectral_radius_PinvQ = rho;
  }
  return r;
}

/// CSV `re_lambda,im_lambda,amplification`.
inline void write_stability_csv(std::ostream& os, const StabilityReport& r) {
  os.precision(17);
  os << "re_lambda,im_lambda,amplification\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    os << r.eigenvalues[i].real() << ',' << r.eigenvalues[i].imag() << ',' << r.amplification[i] << '\n';
}

}  // namespace pumfd
