#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "pumfd/covering.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/linalg.hpp"
#include "pumfd/localinterp.hpp"
#include "pumfd/points.hpp"

namespace pumfd {

/// Global N x N differentiation matrix of the PU interpolant, with the node split.
struct GlobalOperator {
  OpKind op = OpKind::Id;
  SparseMatrix matrix;
  std::vector<std::size_t> interior;
  std::vector<std::size_t> boundary;
};

/// The four operators assembled together from one factorization per patch.
struct OperatorSet {
  GlobalOperator id;
  GlobalOperator lap;
  GlobalOperator dx;
  GlobalOperator dy;
  std::size_t lu_fallback_patches = 0;  // patches where Cholesky gave way to pivoted LU
  double max_local_cond = 0.0;

  const GlobalOperator& get(OpKind op) const {
    switch (op) {
      case OpKind::Id: return id;
      case OpKind::Lap: return lap;
      case OpKind::Dx: return dx;
      case OpKind::Dy: return dy;
    }
    return id;
  }
};

struct AssemblyOptions {
  unsigned workers = 1;
  std::vector<std::size_t> patch_order;  // empty: natural order
};

namespace detail {

struct PatchBlock {
  std::vector<Triplet> id, lap, dx, dy;
  bool lu_fallback = false;
  double cond = 0.0;
};

inline PatchBlock assemble_patch(const KernelSpec& k, const NodeSet& X, const Covering& c,
                                 const Memberships& m, std::size_t j) {
  const LocalSystem ls = build_local_system(k, X, m, j);
  const auto& ids = ls.node_ids();
  const auto& pts = ls.nodes();
  const std::size_t nj = ids.size();

  // Patch nodes are exactly the points x_i with j in I(x_i); there the
  // cardinal functions are psi_k(x_i) = delta_ik.
  const DenseMatrix psi = DenseMatrix::Identity(static_cast<Eigen::Index>(nj), static_cast<Eigen::Index>(nj));
  const DenseMatrix psi_lap = ls.operator_rows(OpKind::Lap, pts);
  const DenseMatrix psi_dx = ls.operator_rows(OpKind::Dx, pts);
  const DenseMatrix psi_dy = ls.operator_rows(OpKind::Dy, pts);

  PatchBlock b;
  b.lu_fallback = ls.factor_kind() == FactorKind::PivotedLU;
  b.cond = ls.cond_estimate();
  for (auto* v : {&b.id, &b.lap, &b.dx, &b.dy}) v->reserve(nj * nj);
  for (std::size_t a = 0; a < nj; ++a) {
    const WeightEval w = c.shepard_weight(j, pts[a]);
    const int row = static_cast<int>(ids[a]);
    for (std::size_t q = 0; q < nj; ++q) {
      const int col = static_cast<int>(ids[q]);
      const double v = psi(a, q);
      const double vx = psi_dx(a, q);
      const double vy = psi_dy(a, q);
      b.id.emplace_back(row, col, w.w * v);
      b.dx.emplace_back(row, col, w.grad_w.x * v + w.w * vx);
      b.dy.emplace_back(row, col, w.grad_w.y * v + w.w * vy);
      b.lap.emplace_back(row, col,
                         w.lap_w * v + 2.0 * (w.grad_w.x * vx + w.grad_w.y * vy) +
                             w.w * psi_lap(a, q));
    }
  }
  return b;
}

}  // namespace detail

/// Assembles Id, Lap, Dx and Dy by the Leibniz rule over the covering.
/// Contributions are merged in patch order so the result does not depend on
/// the number of workers.
inline OperatorSet assemble_all(const KernelSpec& k, const NodeSet& X, const Covering& c,
                                const AssemblyOptions& opt = {}) {
  const Memberships m = c.memberships(X);
  std::vector<std::size_t> order = opt.patch_order;
  if (order.empty()) {
    order.resize(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.size() != c.size()) throw ConfigError("patch order must list every patch once");

  std::vector<detail::PatchBlock> blocks(order.size());
  std::vector<std::exception_ptr> errors(order.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(order.size())));
  auto work = [&](unsigned w) {
    for (std::size_t p = w; p < order.size(); p += workers) {
      try {
        blocks[p] = detail::assemble_patch(k, X, c, m, order[p]);
      } catch (...) {
        errors[p] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  OperatorSet out;
  std::vector<Triplet> id, lap, dx, dy;
  for (const auto& b : blocks) {
    id.insert(id.end(), b.id.begin(), b.id.end());
    lap.insert(lap.end(), b.lap.begin(), b.lap.end());
    dx.insert(dx.end(), b.dx.begin(), b.dx.end());
    dy.insert(dy.end(), b.dy.begin(), b.dy.end());
    out.lu_fallback_patches += b.lu_fallback ? 1 : 0;
    out.max_local_cond = std::max(out.max_local_cond, b.cond);
  }
  const int n = static_cast<int>(X.size());
  const std::vector<std::size_t> interior(X.interior().begin(), X.interior().end());
  const std::vector<std::size_t> boundary(X.boundary().begin(), X.boundary().end());
  out.id = {OpKind::Id, sparse_from_triplets(n, n, id), interior, boundary};
  out.lap = {OpKind::Lap, sparse_from_triplets(n, n, lap), interior, boundary};
  out.dx = {OpKind::Dx, sparse_from_triplets(n, n, dx), interior, boundary};
  out.dy = {OpKind::Dy, sparse_from_triplets(n, n, dy), interior, boundary};
  return out;
}

inline GlobalOperator assemble(OpKind op, const KernelSpec& k, const NodeSet& X, const Covering& c) {
  OperatorSet all = assemble_all(k, X, c);
  switch (op) {
    case OpKind::Id: return std::move(all.id);
    case OpKind::Lap: return std::move(all.lap);
    case OpKind::Dx: return std::move(all.dx);
    case OpKind::Dy: return std::move(all.dy);
  }
  return std::move(all.id);
}

/// Same shape, rows outside `rows` dropped.
inline SparseMatrix restrict_rows(const SparseMatrix& m, std::span<const std::size_t> rows) {
  std::vector<char> keep(static_cast<std::size_t>(m.rows()), 0);
  for (auto r : rows) {
    if (r >= keep.size()) throw ConfigError("row index out of range in restrict_rows");
    keep[r] = 1;
  }
  std::vector<Triplet> t;
  for (int i = 0; i < m.outerSize(); ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) t.emplace_back(i, it.col(), it.value());
  }
  return sparse_from_triplets(static_cast<int>(m.rows()), static_cast<int>(m.cols()), t);
}

inline SparseMatrix interior_rows(const GlobalOperator& g) { return restrict_rows(g.matrix, g.interior); }
inline SparseMatrix boundary_rows(const GlobalOperator& g) { return restrict_rows(g.matrix, g.boundary); }

struct SparsityReport {
  long nnz = 0;
  double density = 0.0;
  long max_bandwidth = 0;      // max |i - k| over stored entries
  double mean_row_bandwidth = 0.0;
  std::vector<long> row_nnz;
};

inline SparsityReport sparsity_report(const SparseMatrix& m) {
  SparsityReport r;
  r.nnz = m.nonZeros();
  const double cells = static_cast<double>(m.rows()) * static_cast<double>(m.cols());
  r.density = cells > 0 ? static_cast<double>(r.nnz) / cells : 0.0;
  double band_sum = 0.0;
  for (int i = 0; i < m.outerSize(); ++i) {
    long row_band = 0;
    long count = 0;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      row_band = std::max<long>(row_band, std::labs(static_cast<long>(it.col()) - i));
      ++count;
    }
    r.row_nnz.push_back(count);
    r.max_bandwidth = std::max(r.max_bandwidth, row_band);
    band_sum += static_cast<double>(row_band);
  }
  r.mean_row_bandwidth = m.rows() ? band_sum / static_cast<double>(m.rows()) : 0.0;
  return r;
}

inline SparsityReport sparsity_report(const GlobalOperator& g) { return sparsity_report(g.matrix); }

}  // namespace pumfd
