#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/numeric.hpp"

namespace equicalib {

inline constexpr int kDefaultEceBins = 100;
inline constexpr double kVarianceFloor = 1e-12;

struct ClassifierOutput {
  int label = 0;
  double confidence = 0.0;
};

struct RegressorOutput {
  Vector mean;
  Vector variance;
};

struct BinRow {
  int bin = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mass = 0.0;
  double accuracy = 0.0;
  double confidence = 0.0;
};

struct EceResult {
  double ece = 0.0;
  std::vector<BinRow> bins;
};

namespace detail {

inline void check_weights(std::size_t n, std::span<const double> weights) {
  if (weights.size() != n) throw DataError("weights absent or count mismatch");
  if (n == 0) throw DataError("empty sample");
  const double total = numeric::pairwise_sum(weights);
  if (std::abs(total - 1.0) > 1e-10) {
    throw DataError("weights not normalized (sum = " + std::to_string(total) + ")");
  }
}

} // namespace detail

inline int confidence_bin(double p, int n_bins) {
  return std::min(n_bins - 1, static_cast<int>(std::floor(p * n_bins)));
}

/// Equal-width binned ECE on [0, 1]: sum over bins of mass * |acc - conf|.
inline EceResult ece_binned(std::span<const ClassifierOutput> outputs, std::span<const int> truths,
                            std::span<const double> weights, int n_bins = kDefaultEceBins) {
  if (n_bins < 1) throw UsageError("n_bins must be >= 1");
  if (truths.size() != outputs.size()) throw DataError("prediction/label count mismatch");
  detail::check_weights(outputs.size(), weights);
  std::vector<std::vector<double>> mass(static_cast<std::size_t>(n_bins));
  std::vector<std::vector<double>> hit(mass.size()), conf(mass.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double p = outputs[i].confidence;
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("confidence outside [0, 1] at index " + std::to_string(i));
    const auto b = static_cast<std::size_t>(confidence_bin(p, n_bins));
    mass[b].push_back(weights[i]);
    hit[b].push_back(outputs[i].label == truths[i] ? weights[i] : 0.0);
    conf[b].push_back(weights[i] * p);
  }
  EceResult out;
  std::vector<double> terms;
  for (int b = 0; b < n_bins; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    BinRow row;
    row.bin = b;
    row.lower = static_cast<double>(b) / n_bins;
    row.upper = static_cast<double>(b + 1) / n_bins;
    row.count = mass[ub].size();
    row.mass = numeric::pairwise_sum(mass[ub]);
    if (row.mass > 0.0) {
      row.accuracy = numeric::pairwise_sum(hit[ub]) / row.mass;
      row.confidence = numeric::pairwise_sum(conf[ub]) / row.mass;
      terms.push_back(row.mass * std::abs(row.accuracy - row.confidence));
    }
    out.bins.push_back(row);
  }
  out.ece = numeric::pairwise_sum(terms);
  return out;
}

inline double weighted_accuracy(std::span<const ClassifierOutput> outputs, std::span<const int> truths,
                                std::span<const double> weights) {
  detail::check_weights(outputs.size(), weights);
  std::vector<double> hit(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) hit[i] = outputs[i].label == truths[i] ? weights[i] : 0.0;
  return numeric::pairwise_sum(hit);
}

enum class FiberMode { exact, epsilon, quantile };

struct FiberScheme {
  FiberMode mode = FiberMode::exact;
  double epsilon = 0.0;
  int k = 10;
};

/// "exact", "eps:<width>" or "quantile:<k>".
inline FiberScheme parse_fiber_scheme(std::string_view text) {
  FiberScheme s;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string tail = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  try {
    if (head == "exact" && tail.empty()) return s;
    if (head == "eps" && !tail.empty()) {
      s.mode = FiberMode::epsilon;
      s.epsilon = std::stod(tail);
      if (s.epsilon > 0.0) return s;
    } else if (head == "quantile" && !tail.empty()) {
      s.mode = FiberMode::quantile;
      s.k = std::stoi(tail);
      if (s.k >= 1) return s;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("bad fiber scheme '" + std::string(text) + "' (expected exact | eps:<width> | quantile:<k>)");
}

struct FiberPartition {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> masses;
};

namespace detail {

inline FiberPartition partition_from_keys(const std::vector<std::vector<double>>& keys,
                                          std::span<const double> weights) {
  std::map<std::vector<double>, std::size_t> slot;
  FiberPartition out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(keys[i], out.groups.size());
    if (fresh) out.groups.emplace_back();
    out.groups[it->second].push_back(i);
  }
  for (const auto& g : out.groups) {
    std::vector<double> w;
    for (std::size_t i : g) w.push_back(weights[i]);
    out.masses.push_back(numeric::pairwise_sum(w));
  }
  return out;
}

inline FiberPartition partition_by_rank(std::span<const double> scalar, std::span<const double> weights, int k) {
  std::vector<std::size_t> order(scalar.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scalar[a] < scalar[b]; });
  std::vector<std::vector<double>> keys(scalar.size());
  const std::size_t n = order.size();
  for (std::size_t r = 0; r < n; ++r) {
    keys[order[r]] = {static_cast<double>(r * static_cast<std::size_t>(k) / n)};
  }
  FiberPartition p = partition_from_keys(keys, weights);
  return p;
}

} // namespace detail

/// Groups samples by predicted confidence.
inline FiberPartition fibers_by_confidence(std::span<const double> confidence, std::span<const double> weights,
                                           const FiberScheme& scheme = {}) {
  if (confidence.size() != weights.size()) throw DataError("confidence/weight count mismatch");
  if (scheme.mode == FiberMode::quantile) return detail::partition_by_rank(confidence, weights, scheme.k);
  std::vector<std::vector<double>> keys;
  for (double p : confidence) {
    keys.push_back({scheme.mode == FiberMode::exact ? p : std::floor(p / scheme.epsilon)});
  }
  return detail::partition_from_keys(keys, weights);
}

/// Groups samples by predicted variance vector: exact equality, per-component
/// epsilon cells, or k equal-count groups ranked by the norm of s.
inline FiberPartition fibers_by_variance(std::span<const RegressorOutput> outputs, std::span<const double> weights,
                                         const FiberScheme& scheme = {}) {
  if (outputs.size() != weights.size()) throw DataError("prediction/weight count mismatch");
  if (scheme.mode == FiberMode::quantile) {
    std::vector<double> norms;
    for (const auto& o : outputs) norms.push_back(o.variance.norm());
    return detail::partition_by_rank(norms, weights, scheme.k);
  }
  std::vector<std::vector<double>> keys;
  for (const auto& o : outputs) {
    std::vector<double> key(static_cast<std::size_t>(o.variance.size()));
    for (Eigen::Index d = 0; d < o.variance.size(); ++d) {
      const double s = o.variance(d);
      key[static_cast<std::size_t>(d)] = scheme.mode == FiberMode::exact ? s : std::floor(s / scheme.epsilon);
    }
    keys.push_back(std::move(key));
  }
  return detail::partition_from_keys(keys, weights);
}

struct FiberTerm {
  double mass = 0.0;
  Vector s;              // representative variance
  double normalized = 0.0; // fiber expectation / denominator
};

struct GenceResult {
  double value = 0.0;
  std::vector<FiberTerm> fibers;
};

namespace detail {

enum class GenceKind { abs, squared };

inline GenceResult gence_impl(GenceKind kind, std::span<const RegressorOutput> outputs, std::span<const Vector> truths,
                              std::span<const double> weights, const FiberPartition& fibers) {
  if (truths.size() != outputs.size()) throw DataError("prediction/target count mismatch");
  detail::check_weights(outputs.size(), weights);
  GenceResult out;
  std::vector<double> terms;
  std::vector<bool> seen(outputs.size(), false);
  for (const auto& group : fibers.groups) {
    if (group.empty()) throw DataError("empty fiber");
    std::vector<double> w;
    for (std::size_t i : group) {
      if (i >= outputs.size() || seen[i]) throw DataError("fibers do not partition the samples");
      seen[i] = true;
      w.push_back(weights[i]);
    }
    const double mass = numeric::pairwise_sum(w);
    if (!(mass > 0.0)) continue;
    const Eigen::Index dim = outputs[group.front()].variance.size();
    Vector s = Vector::Zero(dim);
    for (std::size_t i : group) {
      if (outputs[i].variance.size() != dim || outputs[i].mean.size() != dim || truths[i].size() != dim) {
        throw DataError("prediction/target dimension mismatch");
      }
      s += (weights[i] / mass) * outputs[i].variance;
    }
    if (s.minCoeff() <= kVarianceFloor) throw NumericError("variance underflow");
    const Vector ref = kind == GenceKind::abs ? Vector((2.0 / std::numbers::pi * s.array()).sqrt()) : s;
    std::vector<double> inner;
    for (std::size_t i : group) {
      const Eigen::ArrayXd r = (outputs[i].mean - truths[i]).array();
      const Eigen::ArrayXd e = kind == GenceKind::abs ? Eigen::ArrayXd(r.abs()) : Eigen::ArrayXd(r.square());
      inner.push_back(weights[i] / mass * (ref.array() - e).matrix().squaredNorm());
    }
    const double normalized = numeric::pairwise_sum(inner) / ref.squaredNorm();
    out.fibers.push_back({mass, s, normalized});
    terms.push_back(mass * normalized);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw DataError("fibers do not cover every sample");
  out.value = numeric::pairwise_sum(terms);
  return out;
}

} // namespace detail

/// Generalized ENCE: sum over variance fibers of
/// mass * E[|| sqrt(2s/pi) - |mu - f| ||^2] / || sqrt(2s/pi) ||^2.
inline GenceResult gence(std::span<const RegressorOutput> outputs, std::span<const Vector> truths,
                         std::span<const double> weights, const FiberPartition& fibers) {
  return detail::gence_impl(detail::GenceKind::abs, outputs, truths, weights, fibers);
}

/// Squared variant: E[|| s - (mu - f)^2 ||^2] / || s ||^2 per fiber.
inline GenceResult gence_sq(std::span<const RegressorOutput> outputs, std::span<const Vector> truths,
                            std::span<const double> weights, const FiberPartition& fibers) {
  return detail::gence_impl(detail::GenceKind::squared, outputs, truths, weights, fibers);
}

/// Baseline GENCE of a perfectly calibrated Gaussian predictor.
inline constexpr double kCalibratedGenceBaseline = (std::numbers::pi - 2.0) / 2.0;
inline constexpr double kCalibratedGenceSqBaseline = 2.0;

/// Weighted mean squared error, optionally restricted to `mask` with its
/// weights renormalized.
inline double regression_error(std::span<const Vector> preds, std::span<const Vector> truths,
                               std::span<const double> weights,
                               std::optional<std::span<const std::size_t>> mask = std::nullopt) {
  if (preds.size() != truths.size() || preds.size() != weights.size()) throw DataError("count mismatch");
  std::vector<std::size_t> idx;
  if (mask) {
    idx.assign(mask->begin(), mask->end());
    if (idx.empty()) throw DataError("empty fiber mask");
  } else {
    for (std::size_t i = 0; i < preds.size(); ++i) idx.push_back(i);
  }
  std::vector<double> w, e;
  for (std::size_t i : idx) {
    if (i >= preds.size()) throw DataError("mask index out of range");
    if (preds[i].size() != truths[i].size()) throw DataError("prediction/target dimension mismatch");
    w.push_back(weights[i]);
    e.push_back(weights[i] * (preds[i] - truths[i]).squaredNorm());
  }
  const double mass = numeric::pairwise_sum(w);
  if (!(mass > 0.0)) throw DataError("zero-mass fiber mask");
  return numeric::pairwise_sum(e) / mass;
}

/// Regression error between predicted and true aleatoric variances.
inline double aleatoric_bleed(std::span<const Vector> pred, std::span<const Vector> truth,
                              std::span<const double> weights) {
  for (const auto& p : pred) {
    if ((p.array() < 0.0).any()) throw DataError("negative predicted variance");
  }
  detail::check_weights(pred.size(), weights);
  return regression_error(pred, truth, weights);
}

} // namespace equicalib
