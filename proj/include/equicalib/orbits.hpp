#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "equicalib/dataset.hpp"
#include "equicalib/group.hpp"

namespace equicalib {

inline constexpr double kDefaultOrbitTolerance = 1e-8;

struct OrbitDecomposition {
  std::vector<std::vector<std::size_t>> orbits; // each sorted ascending
  std::vector<double> masses;
  std::vector<std::size_t> representatives;     // smallest index of each orbit
  std::vector<std::size_t> orbit_of;            // sample index -> orbit id

  [[nodiscard]] std::size_t size() const noexcept { return orbits.size(); }
};

namespace detail {

inline double squared_row_distance(const Point& a, Eigen::Index i, const Point& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Exact minimal assignment by enumerating permutations (n <= 8).
inline double exact_assignment(const Matrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n && s < best; ++i) s += cost(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace detail

inline constexpr int kExactAssignmentMaxRows = 8;

/// Squared minimal-assignment distance between two row sets of equal size.
/// Greedy matching gives an upper bound and row-wise nearest neighbours a
/// lower bound; when they straddle `threshold2`, the exact assignment is
/// enumerated (n <= 8; larger sets fall back to the greedy value).
inline double set_distance_squared(const Point& a, const Point& b, double threshold2 = -1.0) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::Index n = a.rows();
  Matrix cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = detail::squared_row_distance(a, i, b, j);
  }
  double lower = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) lower += cost.row(i).minCoeff();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  double greedy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)] && (best < 0 || cost(i, j) < cost(i, best))) best = j;
    }
    used[static_cast<std::size_t>(best)] = true;
    greedy += cost(i, best);
  }
  if (threshold2 >= 0.0 && (greedy <= threshold2 || lower > threshold2)) return greedy <= threshold2 ? greedy : lower;
  if (greedy == lower || n > kExactAssignmentMaxRows) return greedy;
  return detail::exact_assignment(cost);
}

/// Distance used for orbit matching: Euclidean on the flattened point, or the
/// minimal-assignment distance for set-structured inputs.
inline double point_distance(const Point& a, const Point& b, bool as_sets) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  if (as_sets) return std::sqrt(set_distance_squared(a, b));
  return (a - b).norm();
}

namespace detail {

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

private:
  std::vector<std::size_t> parent_;
};

// Finds dataset points within tol of `y`. Euclidean mode prunes candidates by
// the first coordinate (sorted), set mode scans.
class PointIndex {
public:
  PointIndex(const std::vector<Point>& pts, bool as_sets) : pts_(pts), as_sets_(as_sets) {
    order_.resize(pts.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!as_sets_) {
      std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return key(pts_[a]) < key(pts_[b]);
      });
      keys_.reserve(order_.size());
      for (std::size_t i : order_) keys_.push_back(key(pts_[i]));
    }
  }

  template <class F>
  void for_each_match(const Point& y, double tol, F&& f) const {
    if (as_sets_) {
      const double t2 = tol * tol;
      for (std::size_t j = 0; j < pts_.size(); ++j) {
        if (set_distance_squared(y, pts_[j], t2) <= t2) f(j);
      }
      return;
    }
    if (pts_.empty() || y.size() != pts_[0].size()) return;
    const double k = key(y);
    auto lo = std::lower_bound(keys_.begin(), keys_.end(), k - tol);
    for (auto it = lo; it != keys_.end() && *it <= k + tol; ++it) {
      const std::size_t j = order_[static_cast<std::size_t>(it - keys_.begin())];
      if ((y - pts_[j]).norm() <= tol) f(j);
    }
  }

private:
  static double key(const Point& p) { return p.size() ? p(0, 0) : 0.0; }

  const std::vector<Point>& pts_;
  bool as_sets_;
  std::vector<std::size_t> order_;
  std::vector<double> keys_;
};

} // namespace detail

/// Partitions dataset indices into orbits: i and j share an orbit iff some
/// chain of group elements maps one onto (within tol) the other.
inline OrbitDecomposition decompose_orbits(const WeightedDataset& ds, const FiniteGroup& group,
                                           double tol = kDefaultOrbitTolerance) {
  if (!(tol > 0.0)) throw UsageError("orbit tolerance must be positive");
  if (ds.size() == 0) throw UsageError("cannot decompose an empty dataset");
  const std::size_t n = ds.size();
  detail::UnionFind uf(n);
  detail::PointIndex index(ds.points, ds.point_sets);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < group.order(); ++g) {
      if (g == group.identity()) continue;
      const Point y = group.apply(g, ds.points[i]);
      index.for_each_match(y, tol, [&](std::size_t j) { uf.unite(i, j); });
    }
  }
  OrbitDecomposition out;
  out.orbit_of.assign(n, 0);
  std::vector<std::size_t> root_to_orbit(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (root_to_orbit[r] == n) {
      root_to_orbit[r] = out.orbits.size();
      out.orbits.emplace_back();
      out.representatives.push_back(i);
    }
    out.orbit_of[i] = root_to_orbit[r];
    out.orbits[root_to_orbit[r]].push_back(i);
  }
  out.masses.reserve(out.orbits.size());
  for (const auto& orbit : out.orbits) {
    std::vector<double> w;
    w.reserve(orbit.size());
    for (std::size_t i : orbit) w.push_back(ds.weights[i]);
    out.masses.push_back(numeric::pairwise_sum(w));
  }
  return out;
}

} // namespace equicalib
