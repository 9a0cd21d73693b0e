#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/group.hpp"
#include "equicalib/numeric.hpp"
#include "equicalib/orbits.hpp"

namespace equicalib {

inline constexpr double kConditionGuard = 1e12;

/// Sorted distinct labels of a dataset; the codomain Y used by the dissent
/// definitions.
inline std::vector<int> label_codomain(std::span<const int> labels) {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

namespace detail {

// Mass of orbit members whose label differs from y, for every y in the codomain.
inline std::vector<double> disagreement_masses(std::span<const std::size_t> orbit, std::span<const int> labels,
                                               std::span<const double> weights, std::span<const int> codomain) {
  std::vector<double> out;
  out.reserve(codomain.size());
  for (int y : codomain) {
    std::vector<double> w;
    for (std::size_t i : orbit) {
      if (labels[i] != y) w.push_back(weights[i]);
    }
    out.push_back(numeric::pairwise_sum(w));
  }
  return out;
}

} // namespace detail

/// k(Gx): min over labels y of the orbit mass whose label differs from y.
inline double majority_dissent(std::span<const std::size_t> orbit, std::span<const int> labels,
                               std::span<const double> weights, std::span<const int> codomain) {
  if (orbit.empty()) throw UsageError("empty orbit");
  if (codomain.empty()) return 0.0;
  const auto m = detail::disagreement_masses(orbit, labels, weights, codomain);
  return *std::min_element(m.begin(), m.end());
}

inline double majority_dissent(std::span<const std::size_t> orbit, std::span<const int> labels,
                               std::span<const double> weights) {
  return majority_dissent(orbit, labels, weights, label_codomain(labels));
}

/// kappa(Gx): max over labels y of the same mass. A codomain label absent from
/// the orbit yields the full orbit mass.
inline double minority_dissent(std::span<const std::size_t> orbit, std::span<const int> labels,
                               std::span<const double> weights, std::span<const int> codomain) {
  if (orbit.empty()) throw UsageError("empty orbit");
  if (codomain.empty()) return 0.0;
  const auto m = detail::disagreement_masses(orbit, labels, weights, codomain);
  return *std::max_element(m.begin(), m.end());
}

inline double minority_dissent(std::span<const std::size_t> orbit, std::span<const int> labels,
                               std::span<const double> weights) {
  return minority_dissent(orbit, labels, weights, label_codomain(labels));
}

struct TargetStats {
  Vector mean;
  double variance = 0.0;
  double mass = 0.0;
};

/// Orbit-renormalized mean and variance E||mean - f||^2 of the targets.
inline TargetStats orbit_target_stats(std::span<const std::size_t> orbit, std::span<const Vector> targets,
                                      std::span<const double> weights) {
  if (orbit.empty()) throw UsageError("empty orbit");
  std::vector<double> w;
  for (std::size_t i : orbit) w.push_back(weights[i]);
  TargetStats st;
  st.mass = numeric::pairwise_sum(w);
  if (!(st.mass > 0.0)) throw DataError("zero-mass orbit");
  st.mean = Vector::Zero(targets[orbit.front()].size());
  for (std::size_t i : orbit) st.mean += (weights[i] / st.mass) * targets[i];
  std::vector<double> v;
  for (std::size_t i : orbit) v.push_back(weights[i] / st.mass * (st.mean - targets[i]).squaredNorm());
  st.variance = numeric::pairwise_sum(v);
  return st;
}

struct OrbitStats {
  std::size_t size = 0;
  std::size_t representative = 0;
  double mass = 0.0;
  double majority_dissent = 0.0;
  double minority_dissent = 0.0;
  std::optional<Vector> target_mean;
  std::optional<double> target_variance;
};

inline std::vector<OrbitStats> orbit_stats(const WeightedDataset& ds, const OrbitDecomposition& dec,
                                           std::optional<std::vector<int>> codomain = std::nullopt) {
  std::vector<OrbitStats> out;
  std::vector<int> cod;
  if (ds.labels) cod = codomain ? *codomain : label_codomain(*ds.labels);
  for (std::size_t o = 0; o < dec.size(); ++o) {
    OrbitStats st;
    st.size = dec.orbits[o].size();
    st.representative = dec.representatives[o];
    st.mass = dec.masses[o];
    if (ds.labels) {
      st.majority_dissent = majority_dissent(dec.orbits[o], *ds.labels, ds.weights, cod);
      st.minority_dissent = minority_dissent(dec.orbits[o], *ds.labels, ds.weights, cod);
    }
    if (ds.targets && st.mass > 0.0) {
      const auto ts = orbit_target_stats(dec.orbits[o], *ds.targets, ds.weights);
      st.target_mean = ts.mean;
      st.target_variance = ts.variance;
    }
    out.push_back(std::move(st));
  }
  return out;
}

struct ClassificationBounds {
  double error_lower = 0.0; // sum of k over orbits
  double error_upper = 0.0; // sum of kappa over orbits
  double k_star = 0.0;      // smallest nonzero orbit dissent, 0 if none
  double min_orbit_mass = 0.0;
  std::size_t orbits = 0;
  bool vacuous = false;     // every orbit omits some codomain label
};

inline ClassificationBounds classification_bounds(const WeightedDataset& ds, const OrbitDecomposition& dec,
                                                  std::optional<std::vector<int>> codomain = std::nullopt) {
  if (!ds.labels) throw DataError("classification bounds need a labeled dataset");
  const std::vector<int> cod = codomain ? *codomain : label_codomain(*ds.labels);
  ClassificationBounds b;
  b.orbits = dec.size();
  std::vector<double> ks, kappas;
  b.vacuous = true;
  b.min_orbit_mass = dec.masses.empty() ? 0.0 : *std::min_element(dec.masses.begin(), dec.masses.end());
  for (std::size_t o = 0; o < dec.size(); ++o) {
    const double k = majority_dissent(dec.orbits[o], *ds.labels, ds.weights, cod);
    ks.push_back(k);
    kappas.push_back(minority_dissent(dec.orbits[o], *ds.labels, ds.weights, cod));
    if (k > 0.0 && (b.k_star == 0.0 || k < b.k_star)) b.k_star = k;
    std::set<int> present;
    for (std::size_t i : dec.orbits[o]) present.insert((*ds.labels)[i]);
    if (present.size() == cod.size()) b.vacuous = false;
  }
  b.error_lower = numeric::pairwise_sum(ks);
  b.error_upper = numeric::pairwise_sum(kappas);
  return b;
}

inline ClassificationBounds classification_bounds(const WeightedDataset& ds, const FiniteGroup& group,
                                                  double tol = kDefaultOrbitTolerance) {
  return classification_bounds(ds, decompose_orbits(ds, group, tol));
}

inline double cls_error_lower(const WeightedDataset& ds, const FiniteGroup& group,
                              double tol = kDefaultOrbitTolerance) {
  return classification_bounds(ds, group, tol).error_lower;
}

inline double cls_error_upper(const WeightedDataset& ds, const FiniteGroup& group,
                              double tol = kDefaultOrbitTolerance) {
  return classification_bounds(ds, group, tol).error_upper;
}

/// Error of the best invariant regressor: sum of orbit mass * V_Gx[f].
inline double invariant_regression_lower(const WeightedDataset& ds, const OrbitDecomposition& dec) {
  if (!ds.targets) throw DataError("regression bounds need vector targets");
  std::vector<double> terms;
  for (const auto& orbit : dec.orbits) {
    const auto st = orbit_target_stats(orbit, *ds.targets, ds.weights);
    terms.push_back(st.mass * st.variance);
  }
  return numeric::pairwise_sum(terms);
}

/// Per-fiber summary with weights renormalized to the fiber.
struct FiberDissent {
  std::size_t fiber = 0;
  double mass = 0.0;
  double majority_sum = 0.0;  // sum of k_p over orbits of the fiber
  double minority_sum = 0.0;  // sum of kappa_p
  std::size_t orbits = 0;
};

/// Runs the dissent analysis on each fiber separately. `fibers[i]` lists the
/// member indices of fiber i; the label codomain stays the global one.
inline std::vector<FiberDissent> fiber_dissent(const WeightedDataset& ds, const FiniteGroup& group,
                                               const std::vector<std::vector<std::size_t>>& fibers,
                                               double tol = kDefaultOrbitTolerance) {
  if (!ds.labels) throw DataError("fiber dissent needs a labeled dataset");
  const auto cod = label_codomain(*ds.labels);
  std::vector<FiberDissent> out;
  for (std::size_t f = 0; f < fibers.size(); ++f) {
    FiberDissent fd;
    fd.fiber = f;
    std::vector<double> w;
    for (std::size_t i : fibers[f]) w.push_back(ds.weights.at(i));
    fd.mass = numeric::pairwise_sum(w);
    const WeightedDataset sub = ds.restrict(fibers[f]);
    const auto dec = decompose_orbits(sub, group, tol);
    const auto b = classification_bounds(sub, dec, cod);
    fd.majority_sum = b.error_lower;
    fd.minority_sum = b.error_upper;
    fd.orbits = dec.size();
    out.push_back(fd);
  }
  return out;
}

/// Fibers given by the dataset's `fiber` annotation, in increasing id order.
inline std::vector<std::vector<std::size_t>> fibers_from_annotation(const WeightedDataset& ds) {
  if (!ds.fiber) throw DataError("dataset has no fiber annotation");
  std::set<int> ids(ds.fiber->begin(), ds.fiber->end());
  std::vector<std::vector<std::size_t>> out;
  for (int id : ids) {
    out.emplace_back();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if ((*ds.fiber)[i] == id) out.back().push_back(i);
    }
  }
  return out;
}

struct EquivariantOrbitTerm {
  std::size_t orbit = 0;
  std::size_t stabilizer = 1;
  Vector expectation;
  double contribution = 0.0;
};

struct EquivariantBound {
  double value = 0.0;
  std::vector<EquivariantOrbitTerm> orbits;
};

/// Minimal error of an equivariant regressor. For each orbit representative x,
/// with w(gx) the dataset weight of gx divided by the stabilizer size:
///   Q = sum_g w(gx) rho(g)^T rho(g),
///   E = Q^{-1} sum_g w(gx) rho(g)^T rho(g) rho(g)^{-1} f(gx),
///   term = sum_g w(gx) ||f(gx) - rho(g) E||^2.
/// Transforms gx that leave the dataset carry zero weight.
inline EquivariantBound equivariant_orbit_lower_bound(const WeightedDataset& ds, const FiniteGroup& group,
                                                      double tol = kDefaultOrbitTolerance) {
  if (!ds.targets) throw DataError("equivariant bound needs vector targets");
  if (!group.has_output_rep()) throw UsageError("equivariant bound needs an output representation");
  const auto dec = decompose_orbits(ds, group, tol);
  const detail::PointIndex index(ds.points, ds.point_sets);
  const Eigen::Index dim = (*ds.targets)[0].size();
  EquivariantBound out;
  std::vector<double> terms;
  for (std::size_t o = 0; o < dec.size(); ++o) {
    const std::size_t r = dec.representatives[o];
    std::vector<std::optional<std::size_t>> image(group.order());
    std::size_t stab = 0;
    for (std::size_t g = 0; g < group.order(); ++g) {
      const Point y = group.apply(g, ds.points[r]);
      if (point_distance(y, ds.points[r], ds.point_sets) <= tol) ++stab;
      std::optional<std::size_t> best;
      index.for_each_match(y, tol, [&](std::size_t j) {
        if (!best || j < *best) best = j;
      });
      image[g] = best;
    }
    const double alpha = 1.0 / static_cast<double>(std::max<std::size_t>(stab, 1));
    Matrix Q = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);
    for (std::size_t g = 0; g < group.order(); ++g) {
      if (!image[g]) continue;
      const Matrix& rho = group.output_rep(g);
      if (rho.rows() != dim) throw UsageError("output representation does not match target dimension");
      const double w = alpha * ds.weights[*image[g]];
      const Matrix rtr = rho.transpose() * rho;
      Q += w * rtr;
      const Vector pulled = rho.fullPivLu().solve((*ds.targets)[*image[g]]);
      rhs += w * rtr * pulled;
    }
    const Eigen::JacobiSVD<Matrix> svd(Q);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smax > 0.0) || !(smin > 0.0) || smax / smin > kConditionGuard) {
      throw NumericError("degenerate orbit weighting (orbit " + std::to_string(o) + ")");
    }
    EquivariantOrbitTerm t;
    t.orbit = o;
    t.stabilizer = stab;
    t.expectation = Q.ldlt().solve(rhs);
    std::vector<double> parts;
    for (std::size_t g = 0; g < group.order(); ++g) {
      if (!image[g]) continue;
      const double w = alpha * ds.weights[*image[g]];
      parts.push_back(w * ((*ds.targets)[*image[g]] - group.output_rep(g) * t.expectation).squaredNorm());
    }
    t.contribution = numeric::pairwise_sum(parts);
    terms.push_back(t.contribution);
    out.orbits.push_back(std::move(t));
  }
  out.value = numeric::pairwise_sum(terms);
  return out;
}

} // namespace equicalib
