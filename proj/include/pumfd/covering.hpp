#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "pumfd/errors.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/points.hpp"

namespace pumfd {

/// Shepard weight w_j with its gradient and Laplacian at one point.
struct WeightEval {
  double w = 0.0;
  Point2 grad_w{};
  double lap_w = 0.0;
};

/// Node-to-patch incidence. `nodes_of_patch[j]` is J(Omega_j), `patches_of_node[i]` is I(x_i).
struct Memberships {
  std::vector<std::vector<std::size_t>> nodes_of_patch;
  std::vector<std::vector<std::size_t>> patches_of_node;
};

inline constexpr std::size_t kMinLocalNodes = 5;

/// Where the m x m patch centres sit: on a grid that includes the domain
/// corners (spacing 1/(m-1)), or at the centres of an m x m cell grid (spacing 1/m).
enum class CenterLayout { Corners, CellCentered };

inline std::string to_string(CenterLayout l) { return l == CenterLayout::Corners ? "corners" : "cells"; }

inline CenterLayout parse_layout(const std::string& s) {
  if (s == "corners") return CenterLayout::Corners;
  if (s == "cells") return CenterLayout::CellCentered;
  throw ConfigError("unknown patch layout '" + s + "'");
}

/// Circular patches centred on a uniform m_side x m_side grid over [0,1]^2, radius
/// rho = (sqrt(2)/2) H (1 + overlap) for centre spacing H.
class Covering {
 public:
  Covering(int m_side, double overlap_delta, CenterLayout layout = CenterLayout::CellCentered)
      : m_side_(m_side), overlap_(overlap_delta), layout_(layout) {
    if (m_side < 1) throw ConfigError("m_side must be >= 1, got " + std::to_string(m_side));
    if (!(overlap_delta > 0.0)) throw ConfigError("overlap must be positive");
    if (layout == CenterLayout::CellCentered) {
      const double h = 1.0 / m_side;
      for (int i = 0; i < m_side; ++i)
        for (int j = 0; j < m_side; ++j) centers_.push_back({(i + 0.5) * h, (j + 0.5) * h});
      radius_ = std::sqrt(0.5) * h * (1.0 + overlap_delta);
    } else if (m_side == 1) {
      centers_.push_back({0.5, 0.5});
      radius_ = std::sqrt(0.5) * (1.0 + overlap_delta);
    } else {
      const double h = 1.0 / (m_side - 1);
      for (int i = 0; i < m_side; ++i)
        for (int j = 0; j < m_side; ++j)
          centers_.push_back({i == m_side - 1 ? 1.0 : i * h, j == m_side - 1 ? 1.0 : j * h});
      radius_ = std::sqrt(0.5) * h * (1.0 + overlap_delta);
    }
    generator_ = KernelSpec(KernelFamily::W2, 1.0 / radius_);
    verify_coverage(101);
  }

  int m_side() const { return m_side_; }
  CenterLayout layout() const { return layout_; }
  double overlap() const { return overlap_; }
  std::size_t size() const { return centers_.size(); }
  const std::vector<Point2>& centers() const { return centers_; }
  Point2 center(std::size_t j) const { return centers_[j]; }
  double radius() const { return radius_; }
  double gamma() const { return 1.0 / radius_; }

  bool contains(std::size_t j, Point2 x) const { return distance(x, centers_[j]) < radius_; }

  /// I(x) = {j : |x - xi_j| < rho}.
  std::vector<std::size_t> patches_at(Point2 x) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < centers_.size(); ++j)
      if (contains(j, x)) out.push_back(j);
    return out;
  }

  /// Generating function W2(gamma |x - xi_j|) and its derivatives.
  WeightEval generator(std::size_t j, Point2 x) const {
    const Point2 d = x - centers_[j];
    const double r = norm(d);
    const double g = grad_factor(generator_, r);
    return {eval(generator_, r), g * d, laplacian(generator_, r, 2)};
  }

  /// Shepard weight of patch j at x; all-zero when j is not in I(x).
  WeightEval shepard_weight(std::size_t j, Point2 x) const {
    if (!contains(j, x)) return {};
    WeightEval sum{};
    WeightEval own{};
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      if (!contains(k, x)) continue;
      const WeightEval gk = generator(k, x);
      sum.w += gk.w;
      sum.grad_w = sum.grad_w + gk.grad_w;
      sum.lap_w += gk.lap_w;
      if (k == j) own = gk;
    }
    assert(sum.w > 0.0);
    const double s = sum.w;
    const double s2 = s * s;
    WeightEval out;
    out.w = own.w / s;
    out.grad_w = (1.0 / s) * own.grad_w - (own.w / s2) * sum.grad_w;
    out.lap_w = own.lap_w / s - 2.0 * dot(own.grad_w, sum.grad_w) / s2 - own.w * sum.lap_w / s2 +
                2.0 * own.w * dot(sum.grad_w, sum.grad_w) / (s2 * s);
    return out;
  }

  Memberships memberships(const NodeSet& X, std::size_t min_local_nodes = kMinLocalNodes) const {
    Memberships m;
    m.nodes_of_patch.resize(centers_.size());
    m.patches_of_node.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t j = 0; j < centers_.size(); ++j)
        if (contains(j, X[i])) {
          m.nodes_of_patch[j].push_back(i);
          m.patches_of_node[i].push_back(j);
        }
    for (std::size_t j = 0; j < centers_.size(); ++j)
      if (m.nodes_of_patch[j].size() < min_local_nodes)
        throw ConfigError("patch " + std::to_string(j) + " holds " +
                          std::to_string(m.nodes_of_patch[j].size()) + " nodes, fewer than " +
                          std::to_string(min_local_nodes));
    return m;
  }

  /// CSV `cx,cy,radius`.
  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "cx,cy,radius\n";
    for (const auto& c : centers_) os << c.x << ',' << c.y << ',' << radius_ << '\n';
  }

 private:
  void verify_coverage(int probe_side) const {
    const double h = 1.0 / (probe_side - 1);
    for (int a = 0; a < probe_side; ++a)
      for (int b = 0; b < probe_side; ++b) {
        const Point2 p{a * h, b * h};
        bool covered = false;
        for (std::size_t j = 0; j < centers_.size() && !covered; ++j) covered = contains(j, p);
        if (!covered)
          throw ConfigError("covering leaves (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") uncovered");
      }
  }

  int m_side_;
  double overlap_;
  CenterLayout layout_;
  std::vector<Point2> centers_;
  double radius_ = 0.0;
  KernelSpec generator_;
};

inline Covering build_covering(int m_side, double overlap_delta = 0.2,
                               CenterLayout layout = CenterLayout::CellCentered) {
  return Covering(m_side, overlap_delta, layout);
}

}  // namespace pumfd
