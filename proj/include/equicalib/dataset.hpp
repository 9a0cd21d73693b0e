#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equicalib/error.hpp"
#include "equicalib/numeric.hpp"

namespace equicalib {

/// A dataset point. Plain vectors are stored as a single row (1 x d); set-
/// structured inputs (point clouds, DeepSets rows) as n x d matrices.
using Point = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Point row_point(std::initializer_list<double> xs) {
  Point p(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(0, i++) = x;
  return p;
}

inline Point row_point(const Vector& v) { return v.transpose(); }

inline constexpr double kWeightTolerance = 1e-12;

/// Discrete weighted dataset: the finite surrogate for an input density.
/// Exactly one of `labels` / `targets` is set for labeled data; both absent
/// means unlabeled. Optional per-sample annotations travel alongside.
struct WeightedDataset {
  std::vector<Point> points;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<Vector>> targets;
  std::vector<double> weights;

  // Compare points as unordered row sets instead of ordered matrices.
  bool point_sets = false;

  // Generator annotations (calibrated Gaussian mean/variance, fiber ids).
  std::optional<std::vector<Vector>> annotation_mean;
  std::optional<std::vector<Vector>> annotation_variance;
  std::optional<std::vector<int>> fiber;

  // Provenance: generator spec and seed.
  std::string spec;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool has_labels() const noexcept { return labels.has_value(); }
  [[nodiscard]] bool has_targets() const noexcept { return targets.has_value(); }

  [[nodiscard]] double total_weight() const { return numeric::pairwise_sum(weights); }

  void validate() const {
    const std::size_t n = points.size();
    if (weights.size() != n) throw DataError("weights absent or count mismatch");
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("negative or non-finite weight");
    }
    if (n > 0 && std::abs(total_weight() - 1.0) > kWeightTolerance) {
      throw DataError("weights not normalized (sum = " + std::to_string(total_weight()) + ")");
    }
    if (labels && targets) throw DataError("dataset carries both labels and targets");
    if (labels && labels->size() != n) throw DataError("label count mismatch");
    if (targets && targets->size() != n) throw DataError("target count mismatch");
    for (std::size_t i = 1; i < n; ++i) {
      if (points[i].rows() != points[0].rows() || points[i].cols() != points[0].cols()) {
        throw DataError("points do not share one shape (index " + std::to_string(i) + ")");
      }
    }
    if (targets) {
      for (const auto& t : *targets) {
        if (t.size() != (*targets)[0].size()) throw DataError("targets do not share one dimension");
      }
    }
    if (annotation_mean && annotation_mean->size() != n) throw DataError("annotation count mismatch");
    if (annotation_variance && annotation_variance->size() != n) {
      throw DataError("annotation count mismatch");
    }
    if (fiber && fiber->size() != n) throw DataError("fiber count mismatch");
  }

  /// Sub-dataset over `indices`, with weights rescaled to sum to one (the
  /// fiber-renormalized density).
  [[nodiscard]] WeightedDataset restrict(std::span<const std::size_t> indices) const {
    WeightedDataset out;
    out.point_sets = point_sets;
    out.spec = spec;
    out.seed = seed;
    double mass = 0.0;
    for (std::size_t i : indices) mass += weights.at(i);
    if (!(mass > 0.0)) throw DataError("restriction to a zero-mass subset");
    if (labels) out.labels.emplace();
    if (targets) out.targets.emplace();
    for (std::size_t i : indices) {
      out.points.push_back(points[i]);
      out.weights.push_back(weights[i] / mass);
      if (labels) out.labels->push_back((*labels)[i]);
      if (targets) out.targets->push_back((*targets)[i]);
    }
    return out;
  }
};

inline std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

} // namespace equicalib
