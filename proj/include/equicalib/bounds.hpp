#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/SVD>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/group.hpp"
#include "equicalib/metrics.hpp"
#include "equicalib/numeric.hpp"
#include "equicalib/symmetry.hpp"

namespace equicalib {

inline constexpr double kQuadratureTolerance = 1e-9;

struct TruncatedNormal {
  double mu = 0.5;
  double sigma = 0.1;
  double a = 0.0;
  double b = 1.0;
};

struct EmpiricalDensity {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Push-forward density r of confidences (or scalar variances).
using ConfidenceDensity = std::variant<TruncatedNormal, EmpiricalDensity>;

inline double trunc_normal_pdf(double x, double mu, double sigma, double a, double b) {
  if (!(sigma > 0.0)) throw UsageError("truncated normal needs sigma > 0");
  if (!(a < b)) throw UsageError("truncated normal needs a < b");
  const double z = numeric::normal_cdf((b - mu) / sigma) - numeric::normal_cdf((a - mu) / sigma);
  if (!(z >= 1e-300)) throw NumericError("degenerate truncation");
  if (x < a || x > b) return 0.0;
  return numeric::normal_pdf((x - mu) / sigma) / (sigma * z);
}

inline double trunc_normal_pdf(double x, const TruncatedNormal& t) {
  return trunc_normal_pdf(x, t.mu, t.sigma, t.a, t.b);
}

/// "truncnorm:mu,sigma,a,b" or "point:p".
inline ConfidenceDensity parse_density(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  std::vector<double> xs;
  if (colon != std::string_view::npos) {
    std::string rest(text.substr(colon + 1));
    std::size_t pos = 0;
    try {
      while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        xs.push_back(std::stod(rest.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } catch (const std::exception&) {
      xs.clear();
    }
  }
  if (head == "truncnorm" && xs.size() == 4) {
    TruncatedNormal t{xs[0], xs[1], xs[2], xs[3]};
    if (!(t.sigma > 0.0) || !(t.a < t.b)) throw UsageError("truncnorm needs sigma > 0 and a < b");
    return t;
  }
  if (head == "point" && xs.size() == 1) return EmpiricalDensity{{xs[0]}, {1.0}};
  throw UsageError("bad density '" + std::string(text) + "' (expected truncnorm:mu,sigma,a,b or point:p)");
}

namespace detail {

inline void check_empirical(const EmpiricalDensity& e) {
  if (e.values.size() != e.weights.size() || e.values.empty()) throw DataError("empirical density shape mismatch");
  if (std::abs(numeric::pairwise_sum(e.weights) - 1.0) > 1e-10) throw DataError("empirical density not normalized");
}

// Integral of r(p) * g(p) over [lo, hi] intersected with the support of r.
// `kinks` are interior points where g is not smooth; quadrature splits there.
template <class G>
double integrate_density(const ConfidenceDensity& r, const G& g, double lo, double hi,
                         std::initializer_list<double> kinks = {}) {
  if (const auto* e = std::get_if<EmpiricalDensity>(&r)) {
    check_empirical(*e);
    std::vector<double> terms;
    for (std::size_t i = 0; i < e->values.size(); ++i) {
      const double p = e->values[i];
      if (p >= lo && p <= hi) terms.push_back(e->weights[i] * g(p));
    }
    return numeric::pairwise_sum(terms);
  }
  const auto& t = std::get<TruncatedNormal>(r);
  const double a = std::max(lo, t.a);
  const double b = std::min(hi, t.b);
  if (!(a < b)) return 0.0;
  std::vector<double> cuts{a};
  for (double k : kinks) {
    if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += numeric::adaptive_simpson([&](double p) { return trunc_normal_pdf(p, t) * g(p); }, cuts[i],
                                       cuts[i + 1], kQuadratureTolerance / static_cast<double>(cuts.size()));
  }
  return total;
}

} // namespace detail

/// Mass of r on [lo, hi].
inline double density_mass(const ConfidenceDensity& r, double lo, double hi) {
  return detail::integrate_density(r, [](double) { return 1.0; }, lo, hi);
}

/// A bound value together with the named quantities it was assembled from.
struct BoundReport {
  std::string kind;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::vector<std::string> flags;

  [[nodiscard]] double component(std::string_view name) const {
    for (const auto& [k, v] : components) {
      if (k == name) return v;
    }
    throw UsageError("bound report '" + kind + "' has no component '" + std::string(name) + "'");
  }
  [[nodiscard]] bool has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
};

inline BoundReport ece_upper_naive(const ConfidenceDensity& r) {
  const double abs_integral =
      detail::integrate_density(r, [](double p) { return std::abs(0.5 - p); }, 0.0, 1.0, {0.5});
  return {"ece_upper_naive", 0.5 + abs_integral, {{"half_term", 0.5}, {"abs_integral", abs_integral}}, {}};
}

inline BoundReport ece_upper_invariant(const ConfidenceDensity& r, double k_star, double p2_mass) {
  if (!(k_star >= 0.0 && k_star <= 1.0)) throw UsageError("k_star must lie in [0, 1]");
  if (!(p2_mass >= 0.0 && p2_mass <= 1.0)) throw UsageError("P2 mass must lie in [0, 1]");
  BoundReport n = ece_upper_naive(r);
  BoundReport out{"ece_upper_invariant", n.value - k_star * p2_mass, n.components, {}};
  out.components.emplace_back("k_star", k_star);
  out.components.emplace_back("P2_mass", p2_mass);
  if (k_star == 0.0) out.flags.push_back("degenerate-naive");
  return out;
}

inline BoundReport ece_upper_fiberwise(const ConfidenceDensity& r, double m, double p2_mass) {
  if (!(m >= 0.0 && m <= 1.0)) throw UsageError("m must lie in [0, 1]");
  if (!(p2_mass >= 0.0 && p2_mass <= 1.0)) throw UsageError("P2 mass must lie in [0, 1]");
  BoundReport n = ece_upper_naive(r);
  BoundReport out{"ece_upper_fiberwise", n.value - m * p2_mass, n.components, {}};
  out.components.emplace_back("m", m);
  out.components.emplace_back("P2_mass", p2_mass);
  return out;
}

/// Binary tasks: the naive terms are at most 1/2 each and P2 has full mass.
inline BoundReport ece_upper_binary(double m_or_kstar) {
  if (!(m_or_kstar >= 0.0 && m_or_kstar <= 1.0)) throw UsageError("m must lie in [0, 1]");
  return {"ece_upper_binary", 1.0 - m_or_kstar, {{"m", m_or_kstar}}, {}};
}

inline BoundReport ece_upper_bilipschitz(double K2, double k_star, double p2_mass, double min_orbit_mass) {
  if (!(K2 > 0.0)) throw UsageError("K2 must be positive");
  const double shrink = std::min(0.0, -k_star * K2 * p2_mass * min_orbit_mass);
  return {"ece_upper_bilipschitz",
          0.5 + K2 / 4.0 + shrink,
          {{"half_term", 0.5},
           {"K2", K2},
           {"k_star", k_star},
           {"P2_mass", p2_mass},
           {"min_orbit_mass", min_orbit_mass},
           {"shrink", shrink}},
          {}};
}

/// int_0^m r(p)(m - p) dp.
inline BoundReport ece_lower(const ConfidenceDensity& r, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw UsageError("m must lie in [0, 1]");
  const double v = m == 0.0 ? 0.0 : detail::integrate_density(r, [m](double p) { return m - p; }, 0.0, m);
  return {"ece_lower", v, {{"m", m}, {"lower_integral", v}}, {}};
}

/// m' = 1 - (sum of minority dissent) / (mass of the lightest orbit), clamped
/// to [0, 1].
inline BoundReport m_prime(const ClassificationBounds& b) {
  if (!(b.min_orbit_mass > 0.0)) throw NumericError("min orbit mass is zero");
  const double raw = 1.0 - b.error_upper / b.min_orbit_mass;
  BoundReport out{"m_prime",
                  std::clamp(raw, 0.0, 1.0),
                  {{"kappa_sum", b.error_upper}, {"min_orbit_mass", b.min_orbit_mass}, {"m_prime_raw", raw}},
                  {}};
  if (raw < 0.0 || raw > 1.0) out.flags.push_back("clamped");
  if (b.vacuous) out.flags.push_back("vacuous-bound");
  return out;
}

inline BoundReport m_prime(const WeightedDataset& ds, const FiniteGroup& group, double tol = kDefaultOrbitTolerance) {
  return m_prime(classification_bounds(ds, group, tol));
}

/// (min_orbit_mass / K) * m'^2 / 2.
inline BoundReport ece_lower_lipschitz(double K, double m_prime_value, double min_orbit_mass) {
  if (!(K > 0.0)) throw UsageError("K must be positive");
  const double v = min_orbit_mass / K * (m_prime_value * m_prime_value / 2.0);
  return {"ece_lower_lipschitz", v, {{"K", K}, {"m_prime", m_prime_value}, {"min_orbit_mass", min_orbit_mass}}, {}};
}

struct DeepSetsLipschitz {
  int n = 1;
  double sigma_sum_row = 0.0;  // sigma_max of the 1 x n all-ones row
  double sigma_ones = 0.0;     // sigma_max of the n x n all-ones matrix
  double K = 0.0;              // sigma_sum_row * (1 + sigma_ones)
};

inline double sigma_max(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

inline DeepSetsLipschitz deepsets_lipschitz(int n) {
  if (n < 1) throw UsageError("deepsets_lipschitz needs n >= 1");
  DeepSetsLipschitz d;
  d.n = n;
  d.sigma_sum_row = sigma_max(Matrix::Ones(1, n));
  d.sigma_ones = sigma_max(Matrix::Ones(n, n));
  d.K = d.sigma_sum_row * (1.0 + d.sigma_ones);
  return d;
}

/// Permutation-equivariant layer tanh(l1) I + tanh(l2) 11^T.
inline Matrix deepsets_layer(int n, double lambda1, double lambda2) {
  return std::tanh(lambda1) * Matrix::Identity(n, n) + std::tanh(lambda2) * Matrix::Ones(n, n);
}

/// deepsets_layer(n, l1, l2) * A evaluated as tanh(l1) A + tanh(l2) 1 (1^T A).
/// Column sums of integer-valued A are exact, so permuting the rows of A
/// permutes the result bit for bit.
inline Matrix deepsets_apply(double lambda1, double lambda2, const Matrix& A) {
  const Eigen::RowVectorXd colsum = A.colwise().sum();
  Matrix out = std::tanh(lambda1) * A;
  out.rowwise() += std::tanh(lambda2) * colsum;
  return out;
}

struct GenceFiberInput {
  double mass = 0.0;
  double error = 0.0; // err_reg(h, s) on the renormalized fiber
  Vector s;
};

/// 1 + sum over fibers of mass * err / ||sqrt(2s/pi)||^2.
inline BoundReport gence_upper(std::span<const GenceFiberInput> fibers) {
  BoundReport out{"gence_upper", 1.0, {{"one", 1.0}}, {}};
  std::vector<double> terms, masses;
  for (std::size_t i = 0; i < fibers.size(); ++i) {
    const auto& f = fibers[i];
    if (f.s.size() == 0 || f.s.minCoeff() <= kVarianceFloor) throw NumericError("variance underflow");
    const double denom = 2.0 / std::numbers::pi * f.s.sum();
    const double term = f.mass * f.error / denom;
    terms.push_back(term);
    masses.push_back(f.mass);
    out.components.emplace_back("fiber" + std::to_string(i) + "_term", term);
  }
  if (!fibers.empty() && std::abs(numeric::pairwise_sum(masses) - 1.0) > 1e-10) {
    throw DataError("fiber masses must sum to 1");
  }
  out.value = 1.0 + numeric::pairwise_sum(terms);
  return out;
}

/// Sum over scalar variances s < m of mass * (s - m)^2 / s^2.
inline BoundReport gence_sq_lower(const EmpiricalDensity& r_s, double m) {
  if (!(m >= 0.0)) throw UsageError("m must be nonnegative");
  detail::check_empirical(r_s);
  std::vector<double> terms;
  for (std::size_t i = 0; i < r_s.values.size(); ++i) {
    const double s = r_s.values[i];
    if (s <= kVarianceFloor) throw NumericError("variance underflow");
    if (s < m) terms.push_back(r_s.weights[i] * (s - m) * (s - m) / (s * s));
  }
  const double v = numeric::pairwise_sum(terms);
  return {"gence_sq_lower", v, {{"m", m}, {"lower_sum", v}}, {}};
}

/// Smallest n with 2 exp(-2 n eps^2) <= delta.
inline std::int64_t hoeffding_n(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("delta must lie in (0, 1]");
  const double raw = std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
  auto n = static_cast<std::int64_t>(std::ceil(raw));
  auto ok = [&](std::int64_t k) { return 2.0 * std::exp(-2.0 * static_cast<double>(k) * epsilon * epsilon) <= delta; };
  while (n > 0 && ok(n - 1)) --n;
  while (!ok(n)) ++n;
  return std::max<std::int64_t>(n, 0);
}

/// Recomputes a report's value from its components.
inline double recombine(const BoundReport& r) {
  const auto& k = r.kind;
  if (k == "ece_upper_naive") return r.component("half_term") + r.component("abs_integral");
  if (k == "ece_upper_invariant") {
    return r.component("half_term") + r.component("abs_integral") - r.component("k_star") * r.component("P2_mass");
  }
  if (k == "ece_upper_fiberwise") {
    return r.component("half_term") + r.component("abs_integral") - r.component("m") * r.component("P2_mass");
  }
  if (k == "ece_upper_binary") return 1.0 - r.component("m");
  if (k == "ece_upper_bilipschitz") {
    return r.component("half_term") + r.component("K2") / 4.0 +
           std::min(0.0, -r.component("k_star") * r.component("K2") * r.component("P2_mass") *
                             r.component("min_orbit_mass"));
  }
  if (k == "ece_lower") return r.component("lower_integral");
  if (k == "m_prime") {
    return std::clamp(1.0 - r.component("kappa_sum") / r.component("min_orbit_mass"), 0.0, 1.0);
  }
  if (k == "ece_lower_lipschitz") {
    const double mp = r.component("m_prime");
    return r.component("min_orbit_mass") / r.component("K") * mp * mp / 2.0;
  }
  if (k == "gence_upper") {
    double v = r.component("one");
    for (const auto& [name, val] : r.components) {
      if (name.ends_with("_term")) v += val;
    }
    return v;
  }
  if (k == "gence_sq_lower") return r.component("lower_sum");
  throw UsageError("no recombination rule for '" + k + "'");
}

} // namespace equicalib
