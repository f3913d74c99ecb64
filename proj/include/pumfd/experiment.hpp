#pragma once

// Batch experiment drivers behind the command-line tool: single solves,
// shape-parameter sweeps, partition sweeps, stability and sparsity reports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pumfd/assembly.hpp"
#include "pumfd/covering.hpp"
#include "pumfd/errors.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/pde.hpp"
#include "pumfd/points.hpp"
#include "pumfd/stability.hpp"

namespace pumfd {

enum class Mode { Solve, SweepEps, SweepPartitions, Stability, Sparsity };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::SweepEps: return "sweep-eps";
    case Mode::SweepPartitions: return "sweep-partitions";
    case Mode::Stability: return "stability";
    case Mode::Sparsity: return "sparsity";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  for (auto m : {Mode::Solve, Mode::SweepEps, Mode::SweepPartitions, Mode::Stability, Mode::Sparsity})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown mode '" + s + "'");
}

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::ConvDiff;
  PointsKind points = PointsKind::Uniform;
  int n_side = 16;
  int m_side = 2;
  KernelFamily kernel = KernelFamily::IMQ;
  double eps = 1.35;
  double eps_min = 0.05;
  double eps_max = 12.0;
  double eps_step = 0.05;
  double theta = 0.5;
  double dt = 0.001;
  double t_final = 1.0;
  double overlap = 0.2;
  CenterLayout layout = CenterLayout::CellCentered;
  Mode mode = Mode::Solve;
  std::vector<int> m_list;
  unsigned workers = 1;
  bool timing = true;

  TimeScheme scheme() const { return {theta, dt, t_final}; }

  void validate() const {
    require_n_side(n_side);
    if (m_side < 1) throw ConfigError("m_side must be >= 1");
    if (!(overlap > 0.0)) throw ConfigError("overlap must be positive");
    scheme().validate();
    if (mode == Mode::SweepEps) {
      if (!(eps_min > 0.0 && eps_max <= 100.0 && eps_min <= eps_max))
        throw ConfigError("eps sweep range must satisfy 0 < eps_min <= eps_max <= 100");
      if (!(eps_step > 0.0)) throw ConfigError("eps step must be positive");
    } else if (!(eps > 0.0)) {
      throw ConfigError("eps must be positive");
    }
    if (!is_positive_definite(kernel))
      throw ConfigError("the PDE solver needs a positive definite kernel");
    if (mode == Mode::SweepPartitions && m_list.empty()) throw ConfigError("partition sweep needs a list of m values");
  }
};

/// One CSV row: configuration columns, results, and a status tag.
struct ResultRow {
  ExperimentConfig cfg;
  double mae = std::numeric_limits<double>::quiet_NaN();
  double cond_est = std::numeric_limits<double>::quiet_NaN();
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok" || status == "argmin"; }
  double efficiency() const { return mae * solve_seconds; }
};

inline const char* kResultHeader =
    "problem,points,n_side,m_side,kernel,eps,theta,dt,mae,cond_est,setup_seconds,solve_seconds,"
    "t_final,overlap,layout,status";

namespace detail {
inline std::string fmt(const char* spec, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
}  // namespace detail

inline std::string format_row(const ResultRow& r) {
  using detail::fmt;
  const auto& c = r.cfg;
  std::string s;
  s += to_string(c.problem) + ',' + to_string(c.points) + ',' + std::to_string(c.n_side) + ',' +
       std::to_string(c.m_side) + ',' + std::string(to_string(c.kernel)) + ',' + fmt("%.10g", c.eps) + ',' +
       fmt("%.10g", c.theta) + ',' + fmt("%.10g", c.dt) + ',' + fmt("%.6e", r.mae) + ',' +
       fmt("%.6e", r.cond_est) + ',' + fmt("%.6f", c.timing ? r.setup_seconds : 0.0) + ',' +
       fmt("%.6f", c.timing ? r.solve_seconds : 0.0) + ',' + fmt("%.10g", c.t_final) + ',' +
       fmt("%.10g", c.overlap) + ',' + to_string(c.layout) + ',' + r.status;
  return s;
}

inline std::string error_status(const std::exception& e) {
  if (dynamic_cast<const BlowUpError*>(&e)) return "error:blowup";
  if (dynamic_cast<const IllConditionedError*>(&e)) return "error:illconditioned";
  if (dynamic_cast<const ConfigError*>(&e)) return "error:config";
  return "error:numerical";
}

struct SingleRun {
  ResultRow row;
  NodeSet nodes;
  SolverRun run;
};

inline SingleRun run_single_detailed(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  const NodeSet X = make_nodes(cfg.points, cfg.n_side);
  const Covering c = build_covering(cfg.m_side, cfg.overlap, cfg.layout);
  const KernelSpec k(cfg.kernel, cfg.eps);
  RunOptions o = opt;
  o.workers = std::max(o.workers, cfg.workers);
  SingleRun out{{cfg}, X, run(default_problem(cfg.problem), cfg.scheme(), k, X, c, o)};
  out.row.mae = out.run.mae;
  out.row.cond_est = out.run.cond_est;
  out.row.setup_seconds = out.run.setup_seconds;
  out.row.solve_seconds = out.run.solve_seconds;
  return out;
}

/// One solve; errors propagate to the caller.
inline ResultRow run_single(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_single_detailed(cfg).row;
}

/// Like run_single but failures become a row with an error status.
inline ResultRow run_single_marked(const ExperimentConfig& cfg) {
  try {
    return run_single(cfg);
  } catch (const std::exception& e) {
    ResultRow r{cfg};
    r.status = error_status(e);
    return r;
  }
}

namespace detail {

template <typename Fn>
std::vector<ResultRow> run_indexed(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<ResultRow> rows(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  auto body = [&](unsigned w) {
    for (std::size_t i = w; i < count; i += workers) rows[i] = fn(i);
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace detail

/// eps_min, eps_min + step, ... up to eps_max (inclusive within round-off).
inline std::vector<double> eps_grid(double eps_min, double eps_max, double eps_step) {
  const auto count = static_cast<std::size_t>(std::floor((eps_max - eps_min) / eps_step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double e = eps_min + static_cast<double>(i) * eps_step;
    out.push_back(std::round(e * 1e10) / 1e10);
  }
  return out;
}

struct EpsSweep {
  std::vector<ResultRow> rows;  // one per eps, ascending
  ResultRow best;               // status "argmin"
};

inline EpsSweep sweep_eps(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto grid = eps_grid(cfg.eps_min, cfg.eps_max, cfg.eps_step);
  EpsSweep s;
  s.rows = detail::run_indexed(grid.size(), cfg.workers, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.mode = Mode::Solve;
    c.eps = grid[i];
    c.workers = 1;
    return run_single_marked(c);
  });
  const ResultRow* best = nullptr;
  for (const auto& r : s.rows)
    if (r.ok() && std::isfinite(r.mae) && (!best || r.mae < best->mae)) best = &r;
  if (!best) throw NumericalError("eps sweep: every shape parameter failed");
  s.best = *best;
  s.best.status = "argmin";
  return s;
}

/// One row per m_side; efficiency = mae * solve seconds.
inline std::vector<ResultRow> sweep_partitions(const ExperimentConfig& cfg) {
  cfg.validate();
  return detail::run_indexed(cfg.m_list.size(), cfg.workers, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.mode = Mode::Solve;
    c.m_side = cfg.m_list[i];
    c.workers = 1;
    return run_single_marked(c);
  });
}

inline const char* kPartitionHeader =
    "problem,points,n_side,m_side,kernel,eps,theta,dt,mae,cond_est,setup_seconds,solve_seconds,"
    "t_final,overlap,layout,status,efficiency";

inline std::string format_partition_row(const ResultRow& r) {
  return format_row(r) + ',' + detail::fmt("%.6e", r.cfg.timing ? r.efficiency() : 0.0);
}

/// CSV `x,y,exact,approx,abs_error`, one row per node.
inline void emit_solution_fields(std::ostream& os, const NodeSet& X, const SolverRun& run) {
  os << "x,y,exact,approx,abs_error\n";
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    const double err = std::abs(run.approx[e] - run.exact[e]);
    os << detail::fmt("%.17g", X[i].x) << ',' << detail::fmt("%.17g", X[i].y) << ','
       << detail::fmt("%.17g", run.exact[e]) << ',' << detail::fmt("%.17g", run.approx[e]) << ','
       << detail::fmt("%.17g", err) << '\n';
  }
}

/// Assembled operators and time-stepping system for a configuration.
struct BuiltSystem {
  NodeSet nodes;
  OperatorSet ops;
  SteppingSystem system;
};

inline BuiltSystem build_experiment_system(const ExperimentConfig& cfg) {
  const NodeSet X = make_nodes(cfg.points, cfg.n_side);
  const Covering c = build_covering(cfg.m_side, cfg.overlap, cfg.layout);
  const KernelSpec k(cfg.kernel, cfg.eps);
  OperatorSet ops = assemble_all(k, X, c, {cfg.workers, {}});
  SteppingSystem sys = build_system(default_problem(cfg.problem), cfg.scheme(), ops, X);
  return {X, std::move(ops), std::move(sys)};
}

inline StabilityReport stability_report(const ExperimentConfig& cfg) {
  const BuiltSystem b = build_experiment_system(cfg);
  return analyze_stability(default_problem(cfg.problem), cfg.scheme(), b.ops);
}

inline const char* kSparsityHeader =
    "problem,points,n_side,m_side,kernel,eps,layout,nnz,density,max_bandwidth,mean_row_bandwidth";

inline std::string format_sparsity_row(const ExperimentConfig& cfg, const SparsityReport& r) {
  using detail::fmt;
  return to_string(cfg.problem) + ',' + to_string(cfg.points) + ',' + std::to_string(cfg.n_side) + ',' +
         std::to_string(cfg.m_side) + ',' + std::string(to_string(cfg.kernel)) + ',' + fmt("%.10g", cfg.eps) +
         ',' + to_string(cfg.layout) + ',' + std::to_string(r.nnz) + ',' + fmt("%.6f", r.density) + ',' +
         std::to_string(r.max_bandwidth) + ',' + fmt("%.4f", r.mean_row_bandwidth);
}

}  // namespace pumfd
