#pragma once

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "equicalib/bounds.hpp"
#include "equicalib/generators.hpp"
#include "equicalib/group.hpp"
#include "equicalib/symmetry.hpp"

namespace equicalib {

struct ExampleRow {
  std::string label;
  BoundReport report;
};

struct WorkedExample {
  std::string id;
  std::string title;
  std::vector<ExampleRow> rows;

  [[nodiscard]] const BoundReport& row(std::string_view label) const {
    for (const auto& r : rows) {
      if (r.label == label) return r.report;
    }
    throw UsageError("example " + id + " has no row '" + std::string(label) + "'");
  }
};

struct ExampleOptions {
  double s1 = 1.0;
  double s2 = 1.0;
  double sigma = 0.1;                 // 4.1 truncated normal width
  std::optional<double> k_star;       // 4.1 unit-square dissent, user supplied
  double coefficient = 0.03;          // 4.4 printed 1/K
};

inline constexpr const char* kExampleIds[] = {"4.1", "4.2", "4.3", "4.4", "5.1"};

namespace detail {

inline std::string fmt_mu(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", mu);
  return buf;
}

inline WorkedExample example_4_1(const ExampleOptions& o) {
  WorkedExample ex{"4.1", "naive ECE upper bound, truncated normal confidences on [0, 1]", {}};
  for (double mu : {0.25, 0.5, 0.75}) {
    const TruncatedNormal r{mu, o.sigma, 0.0, 1.0};
    ex.rows.push_back({"naive mu=" + fmt_mu(mu), ece_upper_naive(r)});
    if (o.k_star) ex.rows.push_back({"invariant mu=" + fmt_mu(mu), ece_upper_invariant(r, *o.k_star, 1.0)});
  }
  return ex;
}

inline WorkedExample example_4_2() {
  WorkedExample ex{"4.2", "circle-20 under reflection over the x-axis", {}};
  const auto ds = gen::circle20();
  const auto g = build_group("reflect-x");
  const auto halves = fiber_dissent(ds, g, fibers_from_annotation(ds));
  double m = 1.0;
  for (const auto& f : halves) m = std::min(m, f.majority_sum);
  auto two = ece_upper_binary(m);
  two.components.emplace_back("k_sum_right", halves[0].majority_sum);
  two.components.emplace_back("k_sum_left", halves[1].majority_sum);
  ex.rows.push_back({"two fibers", two});
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  const auto whole = fiber_dissent(ds, g, {all});
  ex.rows.push_back({"one fiber", ece_upper_binary(whole[0].majority_sum)});
  return ex;
}

inline WorkedExample example_4_3() {
  WorkedExample ex{"4.3", "circle-20 under C20 rotations", {}};
  const auto b = classification_bounds(gen::circle20(), build_group("cyclic:20"));
  auto r = ece_upper_binary(b.error_lower);
  r.components.emplace_back("orbits", static_cast<double>(b.orbits));
  ex.rows.push_back({"rotation", r});
  return ex;
}

inline WorkedExample example_4_4(const ExampleOptions& o) {
  WorkedExample ex{"4.4", "permutation-24 under S4, DeepSets Lipschitz lower bound", {}};
  const auto b = classification_bounds(gen::permutation24(), build_group("symmetric:4"));
  const auto mp = m_prime(b);
  ex.rows.push_back({"m_prime", mp});
  const auto ds = deepsets_lipschitz(24);
  auto printed = ece_lower_lipschitz(1.0 / o.coefficient, mp.value, b.min_orbit_mass);
  auto exact = ece_lower_lipschitz(ds.K, mp.value, b.min_orbit_mass);
  exact.components.emplace_back("sigma_sum_row", ds.sigma_sum_row);
  exact.components.emplace_back("sigma_ones", ds.sigma_ones);
  if (std::abs(1.0 / o.coefficient - ds.K) > 1e-9 * ds.K) {
    printed.flags.push_back("coefficient-discrepancy");
    exact.flags.push_back("coefficient-discrepancy");
  }
  ex.rows.push_back({"lower bound (printed coefficient)", printed});
  ex.rows.push_back({"lower bound (exact K)", exact});
  return ex;
}

inline WorkedExample example_5_1(const ExampleOptions& o) {
  WorkedExample ex{"5.1", "point clouds under E(2), GENCE upper bound at minimized regression error", {}};
  if (!(o.s1 > 0.0) || !(o.s2 > 0.0)) throw UsageError("s1 and s2 must be positive");
  const std::vector<GenceFiberInput> fibers{{0.5, 0.0, Vector::Constant(1, o.s2)},
                                            {0.5, std::numbers::pi / 8.0, Vector::Constant(1, o.s1)}};
  ex.rows.push_back({"gence upper", gence_upper(fibers)});
  // The printed simplification keeps the fiber's error but drops its mass 0.5.
  const double printed = 1.0 + (std::numbers::pi / 8.0) / (2.0 * o.s1 / std::numbers::pi);
  ex.rows.push_back({"printed form", BoundReport{"gence_upper_printed",
                                                 printed,
                                                 {{"one", 1.0}, {"fiber1_unweighted", printed - 1.0}},
                                                 {"omits-fiber-mass"}}});
  return ex;
}

} // namespace detail

inline WorkedExample run_example(std::string_view id, const ExampleOptions& o = {}) {
  if (id == "4.1") return detail::example_4_1(o);
  if (id == "4.2") return detail::example_4_2();
  if (id == "4.3") return detail::example_4_3();
  if (id == "4.4") return detail::example_4_4(o);
  if (id == "5.1") return detail::example_5_1(o);
  throw UsageError("unknown example id '" + std::string(id) + "' (expected 4.1|4.2|4.3|4.4|5.1)");
}

} // namespace equicalib
