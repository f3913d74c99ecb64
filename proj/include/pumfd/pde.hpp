#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pumfd/assembly.hpp"
#include "pumfd/covering.hpp"
#include "pumfd/errors.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/linalg.hpp"
#include "pumfd/points.hpp"

namespace pumfd {

/// theta-weighted time discretization: theta = 0 explicit, 1/2 Crank-Nicolson, 1 implicit.
struct TimeScheme {
  double theta = 0.5;
  double dt = 0.001;
  double t_final = 1.0;

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0,1]");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be >= 0");
  }

  /// Whole steps of size dt that fit in [0, t_final]; a trailing partial step is dropped.
  std::size_t steps() const {
    const double q = t_final / dt;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::floor(q));
  }

  double final_time() const { return static_cast<double>(steps()) * dt; }
};

/// u_t = kappa Lap u + v . grad u on [0,1]^2 with the exponential manufactured solution.
struct ConvDiffSpec {
  double kappa = 1.0;
  Point2 velocity{1.0, 1.0};
  double a = 1.0;
  double b = 0.1;

  /// Positive root of kappa c^2 - nu c - b = 0 for scalar velocity nu.
  double c() const {
    const double nu = velocity.x;
    return (nu + std::sqrt(nu * nu + 4.0 * b * kappa)) / (2.0 * kappa);
  }

  double exact(Point2 p, double t) const {
    const double cc = c();
    return a * std::exp(b * t) * (std::exp(-cc * p.x) + std::exp(-cc * p.y));
  }
};

/// u_t - alpha Lap u - beta Lap u_t = f.
struct PseudoParabolicSpec {
  double alpha = 1.0;
  double beta = 0.00025;

  double exact(Point2 p, double t) const { return std::exp(2.0 * t) * (std::cos(p.x) + std::sin(p.y)); }
  double forcing(Point2 p, double t) const { return (2.0 + alpha + 2.0 * beta) * exact(p, t); }
};

using ProblemSpec = std::variant<ConvDiffSpec, PseudoParabolicSpec>;

enum class ProblemKind { ConvDiff, Pseudo };

inline std::string to_string(ProblemKind k) { return k == ProblemKind::ConvDiff ? "convdiff" : "pseudo"; }

inline ProblemKind parse_problem(const std::string& s) {
  if (s == "convdiff") return ProblemKind::ConvDiff;
  if (s == "pseudo") return ProblemKind::Pseudo;
  throw ConfigError("unknown problem '" + s + "'");
}

inline ProblemSpec default_problem(ProblemKind k) {
  if (k == ProblemKind::ConvDiff) return ConvDiffSpec{};
  return PseudoParabolicSpec{};
}

inline ProblemKind kind_of(const ProblemSpec& p) {
  return std::holds_alternative<ConvDiffSpec>(p) ? ProblemKind::ConvDiff : ProblemKind::Pseudo;
}

inline double exact_solution(const ProblemSpec& p, Point2 x, double t) {
  return std::visit([&](const auto& s) { return s.exact(x, t); }, p);
}

inline double exact_convdiff(const ConvDiffSpec& s, double x, double y, double t) { return s.exact({x, y}, t); }
inline double exact_pseudo(const PseudoParabolicSpec& s, double x, double y, double t) { return s.exact({x, y}, t); }

/// C u^{n+1} = D u^n + v^{n+1}.
struct SteppingSystem {
  SparseMatrix C;
  SparseMatrix D;
  SparseMatrix A;
  /// v^{n+1} given (t^n, t^{n+1}).
  std::function<Vector(double, double)> v_builder;
};

/// The interior-row spatial operator: kappa Lap + v . grad for convection-diffusion,
/// Lap for the pseudo-parabolic problem.
inline SparseMatrix spatial_operator_interior(const ProblemSpec& p, const OperatorSet& ops) {
  const SparseMatrix lap_i = interior_rows(ops.lap);
  if (const auto* cd = std::get_if<ConvDiffSpec>(&p)) {
    const SparseMatrix dx_i = interior_rows(ops.dx);
    const SparseMatrix dy_i = interior_rows(ops.dy);
    SparseMatrix l = cd->kappa * lap_i + cd->velocity.x * dx_i + cd->velocity.y * dy_i;
    l.makeCompressed();
    return l;
  }
  return lap_i;
}

namespace detail {

inline void require_pd_kernel(const KernelSpec& k) {
  if (!is_positive_definite(k.family))
    throw ConfigError("the PDE solver needs a positive definite kernel; " +
                      std::string(to_string(k.family)) + " is not");
}

inline std::vector<Point2> node_points(const NodeSet& X) { return {X.points().begin(), X.points().end()}; }

}  // namespace detail

inline SteppingSystem build_convdiff_system(const ConvDiffSpec& spec, const TimeScheme& scheme,
                                            const OperatorSet& ops, const NodeSet& X) {
  scheme.validate();
  const double eta = -scheme.theta * scheme.dt;
  const double zeta = (1.0 - scheme.theta) * scheme.dt;
  const SparseMatrix l = spatial_operator_interior(spec, ops);
  const SparseMatrix a_i = interior_rows(ops.id);

  SteppingSystem s;
  s.A = ops.id.matrix;
  s.C = ops.id.matrix + eta * l;
  s.D = a_i + zeta * l;
  s.C.makeCompressed();
  s.D.makeCompressed();
  const auto boundary = ops.id.boundary;
  const auto pts = detail::node_points(X);
  s.v_builder = [spec, boundary, pts](double, double t_next) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(pts.size()));
    for (auto i : boundary) v[static_cast<Eigen::Index>(i)] = spec.exact(pts[i], t_next);
    return v;
  };
  return s;
}

inline SteppingSystem build_pseudo_system(const PseudoParabolicSpec& spec, const TimeScheme& scheme,
                                          const OperatorSet& ops, const NodeSet& X) {
  scheme.validate();
  const double eta = scheme.theta * scheme.dt * spec.alpha;
  const double zeta = (1.0 - scheme.theta) * scheme.dt * spec.alpha;
  const SparseMatrix lap_i = interior_rows(ops.lap);
  const SparseMatrix a_i = interior_rows(ops.id);

  SteppingSystem s;
  s.A = ops.id.matrix;
  s.C = ops.id.matrix - (eta + spec.beta) * lap_i;
  s.D = a_i + (zeta - spec.beta) * lap_i;
  s.C.makeCompressed();
  s.D.makeCompressed();
  const auto interior = ops.id.interior;
  const auto boundary = ops.id.boundary;
  const auto pts = detail::node_points(X);
  const double theta = scheme.theta;
  const double dt = scheme.dt;
  s.v_builder = [spec, interior, boundary, pts, theta, dt](double t_now, double t_next) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(pts.size()));
    for (auto i : interior)
      v[static_cast<Eigen::Index>(i)] =
          dt * (theta * spec.forcing(pts[i], t_next) + (1.0 - theta) * spec.forcing(pts[i], t_now));
    for (auto i : boundary) v[static_cast<Eigen::Index>(i)] = spec.exact(pts[i], t_next);
    return v;
  };
  return s;
}

inline SteppingSystem build_system(const ProblemSpec& p, const TimeScheme& scheme, const OperatorSet& ops,
                                   const NodeSet& X) {
  if (const auto* cd = std::get_if<ConvDiffSpec>(&p)) return build_convdiff_system(*cd, scheme, ops, X);
  return build_pseudo_system(std::get<PseudoParabolicSpec>(p), scheme, ops, X);
}

inline constexpr double kBlowUpFactor = 1e6;

/// Marches `steps` steps from u0 reusing one factorization of C. Throws
/// BlowUpError on non-finite values or growth beyond kBlowUpFactor * max(1, |u0|).
inline Vector march(const SteppingSystem& sys, const SparseLuSolver& lu, Vector u, double dt,
                    std::size_t steps, std::vector<Vector>* history = nullptr) {
  const double limit = kBlowUpFactor * std::max(1.0, u.lpNorm<Eigen::Infinity>());
  if (history) history->push_back(u);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t_now = static_cast<double>(n) * dt;
    const double t_next = static_cast<double>(n + 1) * dt;
    const Vector rhs = sys.D * u + sys.v_builder(t_now, t_next);
    u = lu.solve(rhs);
    const double mx = u.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(mx) || !u.allFinite())
      throw BlowUpError("non-finite solution at step " + std::to_string(n + 1), n + 1);
    if (mx > limit)
      throw BlowUpError("solution grew beyond " + std::to_string(limit) + " at step " + std::to_string(n + 1),
                        n + 1);
    if (history) history->push_back(u);
  }
  return u;
}

struct RunOptions {
  bool compute_cond = true;
  bool keep_history = false;
  unsigned workers = 1;
  std::optional<Vector> initial;  // overrides the exact initial data
};

struct SolverRun {
  Vector u;                         // nodal coefficients at the final time
  Vector approx;                    // p = A u
  Vector exact;                     // exact solution at the nodes
  std::vector<Vector> history;      // u^n, when requested
  double mae = 0.0;
  double cond_est = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  double final_time = 0.0;
  std::size_t steps = 0;
  std::size_t lu_fallback_patches = 0;
};

inline SolverRun run(const ProblemSpec& problem, const TimeScheme& scheme, const KernelSpec& k,
                     const NodeSet& X, const Covering& c, const RunOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  scheme.validate();
  detail::require_pd_kernel(k);

  const auto t0 = clock::now();
  const OperatorSet ops = assemble_all(k, X, c, {opt.workers, {}});
  const SteppingSystem sys = build_system(problem, scheme, ops, X);
  const SparseLuSolver lu(sys.C);
  SolverRun out;
  out.lu_fallback_patches = ops.lu_fallback_patches;
  out.cond_est = opt.compute_cond ? lu.cond_estimate_1norm() : 0.0;
  const auto t1 = clock::now();

  const auto n = static_cast<Eigen::Index>(X.size());
  Vector u0(n);
  for (Eigen::Index i = 0; i < n; ++i) u0[i] = exact_solution(problem, X[static_cast<std::size_t>(i)], 0.0);
  if (opt.initial) {
    if (opt.initial->size() != n) throw ConfigError("initial vector has the wrong size");
    u0 = *opt.initial;
  }
  out.steps = scheme.steps();
  out.final_time = scheme.final_time();
  out.u = march(sys, lu, u0, scheme.dt, out.steps, opt.keep_history ? &out.history : nullptr);
  const auto t2 = clock::now();

  out.approx = sys.A * out.u;
  out.exact.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.exact[i] = exact_solution(problem, X[static_cast<std::size_t>(i)], out.final_time);
  out.mae = (out.approx - out.exact).lpNorm<Eigen::Infinity>();
  out.setup_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return out;
}

}  // namespace pumfd
