#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pumfd/errors.hpp"

namespace pumfd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

enum class PointsKind { Uniform, Halton };

inline std::string to_string(PointsKind k) { return k == PointsKind::Uniform ? "uniform" : "halton"; }

inline PointsKind parse_points_kind(const std::string& s) {
  if (s == "uniform") return PointsKind::Uniform;
  if (s == "halton") return PointsKind::Halton;
  throw ConfigError("unknown point distribution '" + s + "'");
}

inline constexpr double kBoundaryTol = 1e-14;

inline bool on_unit_square_boundary(Point2 p) {
  return p.x <= kBoundaryTol || p.x >= 1.0 - kBoundaryTol || p.y <= kBoundaryTol ||
         p.y >= 1.0 - kBoundaryTol;
}

/// Collocation nodes on [0,1]^2 split into interior and boundary index sets.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<Point2> points) : points_(std::move(points)) {
    is_boundary_.resize(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const Point2 p = points_[i];
      if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0)
        throw ConfigError("node " + std::to_string(i) + " lies outside [0,1]^2");
      is_boundary_[i] = on_unit_square_boundary(p);
      (is_boundary_[i] ? boundary_ : interior_).push_back(i);
    }
  }

  std::size_t size() const { return points_.size(); }
  std::span<const Point2> points() const { return points_; }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  std::span<const std::size_t> interior() const { return interior_; }
  std::span<const std::size_t> boundary() const { return boundary_; }
  bool is_boundary(std::size_t i) const { return is_boundary_[i]; }

  /// CSV `x,y,is_boundary`.
  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "x,y,is_boundary\n";
    for (std::size_t i = 0; i < points_.size(); ++i)
      os << points_[i].x << ',' << points_[i].y << ',' << (is_boundary_[i] ? 1 : 0) << '\n';
  }

 private:
  std::vector<Point2> points_;
  std::vector<bool> is_boundary_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
};

inline void require_n_side(int n_side) {
  if (n_side < 2) throw ConfigError("n_side must be >= 2, got " + std::to_string(n_side));
}

inline NodeSet uniform_grid(int n_side) {
  require_n_side(n_side);
  const double h = 1.0 / (n_side - 1);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n_side) * n_side);
  for (int i = 0; i < n_side; ++i)
    for (int j = 0; j < n_side; ++j) {
      // endpoints exact: i * h may round away from 1
      const double x = (i == n_side - 1) ? 1.0 : i * h;
      const double y = (j == n_side - 1) ? 1.0 : j * h;
      pts.push_back({x, y});
    }
  return NodeSet(std::move(pts));
}

inline double radical_inverse(std::size_t k, unsigned base) {
  double inv_base = 1.0 / base;
  double f = inv_base;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv_base;
  }
  return r;
}

/// Halton points k = 1..count in bases 2 and 3.
inline std::vector<Point2> halton_2d(std::size_t count) {
  std::vector<Point2> out;
  out.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) out.push_back({radical_inverse(k, 2), radical_inverse(k, 3)});
  return out;
}

/// Equally spaced nodes along the perimeter, 4(n_side - 1) of them, corners included.
inline std::vector<Point2> perimeter_nodes(int n_side) {
  require_n_side(n_side);
  const double h = 1.0 / (n_side - 1);
  std::vector<Point2> pts;
  for (int i = 0; i < n_side - 1; ++i) {
    const double t = i * h;
    pts.push_back({t, 0.0});
    pts.push_back({1.0, t});
    pts.push_back({1.0 - t, 1.0});
    pts.push_back({0.0, 1.0 - t});
  }
  return pts;
}

/// n_side^2 nodes: equally spaced perimeter nodes plus Halton interior points.
inline NodeSet halton_node_set(int n_side) {
  require_n_side(n_side);
  std::vector<Point2> pts = perimeter_nodes(n_side);
  const std::size_t total = static_cast<std::size_t>(n_side) * n_side;
  std::size_t k = 1;
  while (pts.size() < total) {
    const Point2 p{radical_inverse(k, 2), radical_inverse(k, 3)};
    ++k;
    if (!on_unit_square_boundary(p)) pts.push_back(p);
  }
  return NodeSet(std::move(pts));
}

inline NodeSet make_nodes(PointsKind kind, int n_side) {
  return kind == PointsKind::Uniform ? uniform_grid(n_side) : halton_node_set(n_side);
}

/// Discrete fill distance: max over a probe grid of the distance to the nearest node.
inline double fill_distance(std::span<const Point2> nodes, int probe_grid_side = 201) {
  if (nodes.empty()) throw ConfigError("fill_distance needs a nonempty node set");
  if (probe_grid_side < 2) throw ConfigError("probe grid side must be >= 2");
  const double h = 1.0 / (probe_grid_side - 1);
  double worst = 0.0;
  for (int i = 0; i < probe_grid_side; ++i)
    for (int j = 0; j < probe_grid_side; ++j) {
      const Point2 p{i * h, j * h};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : nodes) best = std::min(best, distance(p, q));
      worst = std::max(worst, best);
    }
  return worst;
}

inline double fill_distance(const NodeSet& X, int probe_grid_side = 201) {
  return fill_distance(X.points(), probe_grid_side);
}

}  // namespace pumfd
