#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/numeric.hpp"
#include "equicalib/rng.hpp"

namespace equicalib::gen {

inline constexpr int kBlue = 0;
inline constexpr int kOrange = 1;

/// Twenty points on the unit circle at angles 9 + 18k degrees (none on the
/// x-axis). Under reflection over the x-axis the pairs are {k, 19-k}. The
/// right half holds four pure-blue orbits and one mixed orbit; every orbit on
/// the left half is mixed. 14 blue / 6 orange overall. `fiber` marks the right
/// half as 0 and the left half as 1.
inline WeightedDataset circle20() {
  WeightedDataset ds;
  ds.spec = "circle20";
  ds.labels.emplace();
  ds.fiber.emplace();
  for (int k = 0; k < 20; ++k) {
    const double a = (9.0 + 18.0 * k) * std::numbers::pi / 180.0;
    ds.points.push_back(row_point({std::cos(a), std::sin(a)}));
    const int partner = 19 - k;
    const int lo = std::min(k, partner);
    const bool right = lo <= 4;
    int label = kBlue;
    if (!(right && lo <= 3)) label = (k == lo) ? kBlue : kOrange; // mixed orbit
    ds.labels->push_back(label);
    ds.fiber->push_back(right ? 0 : 1);
  }
  ds.weights = uniform_weights(20);
  ds.validate();
  return ds;
}

struct SwissRollParams {
  double correct_ratio = 1.0;
  int n_per_arm = 250;
  int sectors = 8;
  std::uint64_t seed = 0;
};

inline double swiss_radius(double theta) { return 0.4 + 0.15 * theta / std::numbers::pi; }

/// Two interleaved spiral arms, each copied at z = 0 and z = 1 so the z-swap
/// action maps the dataset onto itself. The arm parameter range [0, 3pi] is cut
/// into `sectors` equal blocks; round(correct_ratio * sectors) randomly chosen
/// blocks keep their z = 0 label at z = 1, the others flip it.
inline WeightedDataset swiss_rolls(const SwissRollParams& p) {
  if (p.n_per_arm < 10) throw UsageError("swiss rolls need n_per_arm >= 10");
  if (!(p.correct_ratio >= 0.0 && p.correct_ratio <= 1.0)) {
    throw UsageError("correct_ratio must lie in [0, 1]");
  }
  if (p.sectors < 1) throw UsageError("sectors must be >= 1");
  const SeedTree root(p.seed);
  auto eng = root.child("swiss/theta").engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> sector_ids(static_cast<std::size_t>(p.sectors));
  std::iota(sector_ids.begin(), sector_ids.end(), 0);
  auto shuffle_eng = root.child("swiss/sectors").engine();
  std::shuffle(sector_ids.begin(), sector_ids.end(), shuffle_eng);
  const auto n_correct = static_cast<std::size_t>(std::lround(p.correct_ratio * p.sectors));
  std::vector<bool> correct(static_cast<std::size_t>(p.sectors), false);
  for (std::size_t i = 0; i < n_correct; ++i) correct[static_cast<std::size_t>(sector_ids[i])] = true;

  WeightedDataset ds;
  ds.spec = "swiss:ratio=" + std::to_string(p.correct_ratio) + ",n=" + std::to_string(p.n_per_arm) +
            ",sectors=" + std::to_string(p.sectors);
  ds.seed = p.seed;
  ds.labels.emplace();
  const double span = 3.0 * std::numbers::pi;
  for (int z = 0; z < 2; ++z) {
    auto theta_eng = eng; // identical xy layout at both z levels
    for (int arm = 0; arm < 2; ++arm) {
      for (int i = 0; i < p.n_per_arm; ++i) {
        const double u = unit(theta_eng);
        const double theta = span * (i + u) / p.n_per_arm; // stratified along the arm
        const int sector = std::min(p.sectors - 1, i * p.sectors / p.n_per_arm);
        const double r = swiss_radius(theta);
        const double phi = theta + arm * std::numbers::pi;
        ds.points.push_back(row_point({r * std::cos(phi), r * std::sin(phi), static_cast<double>(z)}));
        int label = arm;
        if (z == 1 && !correct[static_cast<std::size_t>(sector)]) label = 1 - arm;
        ds.labels->push_back(label);
      }
    }
  }
  ds.weights = uniform_weights(ds.points.size());
  ds.validate();
  return ds;
}

/// The 4! row orderings of {a, b, c, d}; label 0 iff the first row is a.
inline WeightedDataset permutation24() {
  const std::vector<Vector> rows = {
      (Vector(2) << 1.0, 0.0).finished(), (Vector(2) << 0.0, 1.0).finished(),
      (Vector(2) << -1.0, 0.5).finished(), (Vector(2) << 0.25, -2.0).finished()};
  WeightedDataset ds;
  ds.spec = "permutation24";
  ds.labels.emplace();
  std::vector<int> perm = {0, 1, 2, 3};
  do {
    Point p(4, 2);
    for (int i = 0; i < 4; ++i) p.row(i) = rows[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])].transpose();
    ds.points.push_back(p);
    ds.labels->push_back(perm[0] == 0 ? 0 : 1);
  } while (std::next_permutation(perm.begin(), perm.end()));
  ds.weights = uniform_weights(24);
  ds.validate();
  return ds;
}

/// Five planar point clouds a(+), a(x), b, c, d with probabilities
/// 0.125, 0.125, 0.125, 0.125, 0.5. a(x) is a(+) turned by 45 degrees and c is
/// b turned by 90 degrees, so under cyclic:8 the orbits are {a+, ax}, {b, c},
/// {d}. Targets in R^2: a(+) and a(x) share one; b and c sit sqrt(pi) apart
/// (orbit variance pi/4). Fibers: {a+, ax, b, c} -> 0, {d} -> 1.
inline WeightedDataset pointcloud_gence() {
  const double h = std::numbers::sqrt2 / 2.0;
  auto cloud = [](std::initializer_list<std::pair<double, double>> xy) {
    Point p(static_cast<Eigen::Index>(xy.size()), 2);
    Eigen::Index i = 0;
    for (auto [x, y] : xy) {
      p(i, 0) = x;
      p(i, 1) = y;
      ++i;
    }
    return p;
  };
  WeightedDataset ds;
  ds.spec = "pointcloud_gence";
  ds.point_sets = true;
  ds.points = {
      cloud({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}),
      cloud({{h, h}, {-h, h}, {-h, -h}, {h, -h}}),
      cloud({{2, 0}, {0, 1}, {-1, 0}, {0, -0.5}}),
      cloud({{0, 2}, {-1, 0}, {0, -1}, {0.5, 0}}),
      cloud({{3, 0}, {0, 3}, {-3, 0}, {0, -2}}),
  };
  const double half = std::sqrt(std::numbers::pi) / 2.0;
  ds.targets = std::vector<Vector>{
      (Vector(2) << 1.0, 1.0).finished(), (Vector(2) << 1.0, 1.0).finished(),
      (Vector(2) << 0.0, half).finished(), (Vector(2) << 0.0, -half).finished(),
      (Vector(2) << 2.0, 0.0).finished()};
  ds.weights = {0.125, 0.125, 0.125, 0.125, 0.5};
  ds.fiber = std::vector<int>{0, 0, 0, 0, 1};
  ds.validate();
  return ds;
}

enum class VectorField { spiral, sinusoidal };

/// Spiral: f(x) = Qx with Q the 90-degree rotation about z.
/// Sinusoidal: f(x) = -sin^2(|x|) x.
inline Vector vector_field_target(VectorField kind, const Vector& x) {
  if (kind == VectorField::spiral) {
    Vector f = Vector::Zero(x.size());
    f(0) = -x(1);
    f(1) = x(0);
    return f;
  }
  const double s = std::sin(x.norm());
  return -(s * s) * x;
}

inline WeightedDataset vector_field(VectorField kind, int n, double radius, std::uint64_t seed) {
  if (n < 1) throw UsageError("vector field needs n >= 1");
  if (!(radius > 0.0)) throw UsageError("vector field radius must be positive");
  auto eng = SeedTree(seed).child(kind == VectorField::spiral ? "field/spiral" : "field/sinusoidal").engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WeightedDataset ds;
  ds.spec = std::string(kind == VectorField::spiral ? "vectorfield:spiral" : "vectorfield:sinusoidal") +
            ",n=" + std::to_string(n) + ",radius=" + std::to_string(radius);
  ds.seed = seed;
  ds.targets.emplace();
  for (int i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(unit(eng));
    const double a = 2.0 * std::numbers::pi * unit(eng);
    Vector x(3);
    x << r * std::cos(a), r * std::sin(a), 0.0;
    ds.points.push_back(row_point(x));
    ds.targets->push_back(vector_field_target(kind, x));
  }
  ds.weights = uniform_weights(ds.points.size());
  ds.validate();
  return ds;
}

struct CalibratedGaussianParams {
  int n = 1000;
  int dims = 1;
  double s_min = 0.5;
  double s_max = 2.0;
  std::uint64_t seed = 0;
  // Latin-hypercube noise: each dimension's normal quantiles are drawn from a
  // random permutation of n equal-probability strata. Every draw is still
  // marginally Normal(0, s).
  bool stratified = false;
};

/// Targets mu + eps with eps ~ Normal(0, diag(s)); the generating (mu, s) are
/// stored as annotations and mu doubles as the point.
inline WeightedDataset calibrated_gaussian(const CalibratedGaussianParams& p) {
  if (p.n < 1 || p.dims < 1) throw UsageError("calibrated gaussian needs n >= 1 and dims >= 1");
  if (!(p.s_min > 0.0) || p.s_max < p.s_min) throw UsageError("s_range must be positive and ordered");
  const SeedTree root(p.seed);
  auto eng = root.child("gauss/params").engine();
  auto noise = root.child("gauss/noise").engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> z(static_cast<std::size_t>(p.dims));
  for (auto& col : z) {
    col.resize(static_cast<std::size_t>(p.n));
    if (p.stratified) {
      std::vector<std::size_t> strata(col.size());
      std::iota(strata.begin(), strata.end(), 0);
      std::shuffle(strata.begin(), strata.end(), noise);
      for (std::size_t i = 0; i < col.size(); ++i) {
        double u = (static_cast<double>(strata[i]) + unit(noise)) / p.n;
        u = std::clamp(u, 1e-300, 1.0 - 1e-16);
        col[i] = numeric::normal_quantile(u);
      }
    } else {
      for (double& v : col) v = normal(noise);
    }
  }

  WeightedDataset ds;
  ds.spec = "calibrated_gaussian:n=" + std::to_string(p.n) + ",dims=" + std::to_string(p.dims);
  ds.seed = p.seed;
  ds.targets.emplace();
  ds.annotation_mean.emplace();
  ds.annotation_variance.emplace();
  for (int i = 0; i < p.n; ++i) {
    Vector mu(p.dims), s(p.dims), y(p.dims);
    for (int d = 0; d < p.dims; ++d) {
      mu(d) = 2.0 * unit(eng) - 1.0;
      s(d) = p.s_min + (p.s_max - p.s_min) * unit(eng);
      y(d) = mu(d) + std::sqrt(s(d)) * z[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
    }
    ds.points.push_back(row_point(mu));
    ds.targets->push_back(y);
    ds.annotation_mean->push_back(mu);
    ds.annotation_variance->push_back(s);
  }
  ds.weights = uniform_weights(ds.points.size());
  ds.validate();
  return ds;
}

} // namespace equicalib::gen
