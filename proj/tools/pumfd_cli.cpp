// pumfd: batch runner for the RBF-PUM-FD solver. CSV on --out (or stdout),
// diagnostics on stderr. Exit 0 ok, 2 bad configuration, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "pumfd/pumfd.hpp"

namespace {

using namespace pumfd;

struct Outputs {
  std::string out;
  std::string fields_out;
  std::string nodes_out;
  std::string covering_out;
  std::string matrix_out;
};

std::ofstream open_file(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  return f;
}

void solve_mode(const ExperimentConfig& cfg, const Outputs& o, std::ostream& os) {
  cfg.validate();
  const SingleRun r = run_single_detailed(cfg);
  os << kResultHeader << '\n' << format_row(r.row) << '\n';
  if (!o.fields_out.empty()) {
    auto f = open_file(o.fields_out);
    emit_solution_fields(f, r.nodes, r.run);
  }
  if (r.run.lu_fallback_patches)
    std::cerr << "note: " << r.run.lu_fallback_patches << " patch(es) factored with pivoted LU\n";
}

void sweep_eps_mode(const ExperimentConfig& cfg, std::ostream& os) {
  const EpsSweep s = sweep_eps(cfg);
  os << kResultHeader << '\n';
  for (const auto& r : s.rows) os << format_row(r) << '\n';
  os << format_row(s.best) << '\n';
  std::cerr << "best eps " << s.best.cfg.eps << " mae " << s.best.mae << '\n';
}

void sweep_partitions_mode(const ExperimentConfig& cfg, std::ostream& os) {
  os << kPartitionHeader << '\n';
  for (const auto& r : sweep_partitions(cfg)) os << format_partition_row(r) << '\n';
}

void stability_mode(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  const StabilityReport r = stability_report(cfg);
  write_stability_csv(os, r);
  std::cerr << "max amplification " << r.max_amplification << ", max Re(lambda) " << r.max_real_part;
  if (r.explicit_bound.value)
    std::cerr << ", explicit dt bound " << *r.explicit_bound.value;
  else
    std::cerr << ", explicit dt bound: none (" << r.explicit_bound.reason << ")";
  if (r.spectral_radius_PinvQ) std::cerr << ", rho(P^-1 Q) " << *r.spectral_radius_PinvQ;
  std::cerr << '\n';
}

void sparsity_mode(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  const BuiltSystem b = build_experiment_system(cfg);
  os << kSparsityHeader << '\n' << format_sparsity_row(cfg, sparsity_report(b.system.C)) << '\n';
}

void write_side_outputs(const ExperimentConfig& cfg, const Outputs& o) {
  if (!o.nodes_out.empty()) {
    auto f = open_file(o.nodes_out);
    make_nodes(cfg.points, cfg.n_side).write_csv(f);
  }
  if (!o.covering_out.empty()) {
    auto f = open_file(o.covering_out);
    build_covering(cfg.m_side, cfg.overlap, cfg.layout).write_csv(f);
  }
  if (!o.matrix_out.empty()) {
    auto f = open_file(o.matrix_out);
    write_matrix_market(f, build_experiment_system(cfg).system.C);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RBF partition-of-unity collocation with theta-scheme time stepping"};
  ExperimentConfig cfg;
  Outputs o;
  std::string problem = "convdiff", points = "uniform", kernel = "imq", mode = "solve", layout = "cells";
  bool stability = false;
  bool no_timing = false;

  app.add_option("--problem", problem, "convdiff | pseudo")->capture_default_str();
  app.add_option("--points", points, "uniform | halton")->capture_default_str();
  app.add_option("--n-side", cfg.n_side, "nodes per side")->capture_default_str();
  app.add_option("--m-side", cfg.m_side, "patches per side")->capture_default_str();
  app.add_option("--kernel", kernel, "ga | mq | imq | tps | m4 | m2 | w4 | w2")->capture_default_str();
  app.add_option("--eps", cfg.eps, "shape parameter")->capture_default_str();
  app.add_option("--eps-min", cfg.eps_min)->capture_default_str();
  app.add_option("--eps-max", cfg.eps_max)->capture_default_str();
  app.add_option("--eps-step", cfg.eps_step)->capture_default_str();
  app.add_option("--theta", cfg.theta)->capture_default_str();
  app.add_option("--dt", cfg.dt)->capture_default_str();
  app.add_option("--t-final", cfg.t_final)->capture_default_str();
  app.add_option("--overlap", cfg.overlap, "patch overlap factor")->capture_default_str();
  app.add_option("--layout", layout, "patch centres: cells | corners")->capture_default_str();
  app.add_option("--mode", mode, "solve | sweep-eps | sweep-partitions | stability | sparsity")
      ->capture_default_str();
  app.add_flag("--stability", stability, "same as --mode stability");
  app.add_option("--m-list", cfg.m_list, "m_side values for sweep-partitions")->delimiter(',');
  app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
  app.add_flag("--no-timing", no_timing, "write zero timing columns (byte-stable output)");
  app.add_option("--out", o.out, "CSV output path (default stdout)");
  app.add_option("--fields-out", o.fields_out, "per-node x,y,exact,approx,abs_error CSV (solve)");
  app.add_option("--nodes-out", o.nodes_out, "node set CSV");
  app.add_option("--covering-out", o.covering_out, "covering CSV");
  app.add_option("--matrix-out", o.matrix_out, "system matrix C in Matrix Market format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.problem = parse_problem(problem);
    cfg.points = parse_points_kind(points);
    cfg.kernel = parse_kernel_family(kernel);
    cfg.layout = parse_layout(layout);
    cfg.mode = stability ? Mode::Stability : parse_mode(mode);
    cfg.timing = !no_timing;
    if (cfg.workers == 0) throw ConfigError("workers must be >= 1");

    std::ostringstream buf;
    switch (cfg.mode) {
      case Mode::Solve: solve_mode(cfg, o, buf); break;
      case Mode::SweepEps: sweep_eps_mode(cfg, buf); break;
      case Mode::SweepPartitions: sweep_partitions_mode(cfg, buf); break;
      case Mode::Stability: stability_mode(cfg, buf); break;
      case Mode::Sparsity: sparsity_mode(cfg, buf); break;
    }
    write_side_outputs(cfg, o);
    if (o.out.empty()) {
      std::cout << buf.str();
    } else {
      auto f = open_file(o.out);
      f << buf.str();
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const BlowUpError& e) {
    std::cerr << "error[blowup]: " << e.what() << '\n';
    return 3;
  } catch (const IllConditionedError& e) {
    std::cerr << "error[illconditioned]: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error[numerical]: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
