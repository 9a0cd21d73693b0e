#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "equicalib/bounds.hpp"
#include "equicalib/generators.hpp"
#include "equicalib/metrics.hpp"

using namespace equicalib;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

std::vector<ClassifierOutput> constant_outputs(std::size_t n, int label, double p) {
  return std::vector<ClassifierOutput>(n, ClassifierOutput{label, p});
}

// Single-bin ECE by hand: |weighted accuracy - weighted confidence|.
double single_bin_oracle(const std::vector<ClassifierOutput>& out, const std::vector<int>& y) {
  double acc = 0.0, conf = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    acc += out[i].label == y[i] ? 1.0 : 0.0;
    conf += out[i].confidence;
  }
  return std::abs(acc - conf) / static_cast<double>(out.size());
}

FiberPartition one_fiber(std::size_t n) {
  FiberPartition p;
  p.groups.emplace_back();
  for (std::size_t i = 0; i < n; ++i) p.groups[0].push_back(i);
  p.masses = {1.0};
  return p;
}

} // namespace

TEST(Ece, PerfectAndInverted) {
  const std::vector<int> y(8, 1);
  const auto w = uniform_weights(8);
  EXPECT_EQ(ece_binned(constant_outputs(8, 1, 1.0), y, w).ece, 0.0);
  EXPECT_EQ(ece_binned(constant_outputs(8, 0, 1.0), y, w).ece, 1.0);
}

TEST(Ece, SingleBinHandComputation) {
  auto out = constant_outputs(10, 1, 0.8);
  std::vector<int> y(10, 1);
  for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = 0;
  const double expected = single_bin_oracle(out, y);
  EXPECT_NEAR(expected, 0.2, 1e-15);
  const auto r = ece_binned(out, y, uniform_weights(10), 100);
  EXPECT_NEAR(r.ece, expected, 1e-15);
  EXPECT_EQ(r.bins.size(), 100u);
  EXPECT_EQ(r.bins[80].count, 10u);
  EXPECT_NEAR(r.bins[80].accuracy, 0.6, 1e-15);
}

TEST(Ece, RejectsBadConfidenceAndBins) {
  const std::vector<int> y(2, 0);
  EXPECT_THROW(ece_binned(constant_outputs(2, 0, 1.2), y, uniform_weights(2)), DataError);
  EXPECT_THROW(ece_binned(constant_outputs(2, 0, 0.5), y, uniform_weights(2), 0), UsageError);
  EXPECT_THROW(ece_binned(constant_outputs(2, 0, 0.5), y, std::vector<double>{0.5, 0.4}), DataError);
}

TEST(Ece, BoundedOrderInvariantAndMergeInvariant) {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial);
    std::vector<ClassifierOutput> out(n);
    std::vector<int> y(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = {static_cast<int>(eng() % 3), std::round(u(eng) * 20.0) / 20.0};
      y[i] = static_cast<int>(eng() % 3);
      w[i] = u(eng) + 0.01;
    }
    const double tot = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= tot;
    const double e = ece_binned(out, y, w, 10).ece;
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    std::vector<ClassifierOutput> out2;
    std::vector<int> y2;
    std::vector<double> w2;
    for (std::size_t i : perm) {
      out2.push_back(out[i]);
      y2.push_back(y[i]);
      w2.push_back(w[i]);
    }
    EXPECT_NEAR(ece_binned(out2, y2, w2, 10).ece, e, 1e-12);

    // duplicate sample 0 with its weight split in two
    auto out3 = out;
    auto y3 = y;
    auto w3 = w;
    out3.push_back(out[0]);
    y3.push_back(y[0]);
    w3[0] *= 0.25;
    w3.push_back(w[0] * 0.75);
    EXPECT_NEAR(ece_binned(out3, y3, w3, 10).ece, e, 1e-12);
  }
}

TEST(Fibers, SchemesPartitionSamples) {
  EXPECT_EQ(parse_fiber_scheme("exact").mode, FiberMode::exact);
  EXPECT_EQ(parse_fiber_scheme("quantile:10").k, 10);
  EXPECT_DOUBLE_EQ(parse_fiber_scheme("eps:0.25").epsilon, 0.25);
  EXPECT_THROW(parse_fiber_scheme("quantile:0"), UsageError);
  EXPECT_THROW(parse_fiber_scheme("bins"), UsageError);

  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<RegressorOutput> out;
  for (int i = 0; i < 100; ++i) out.push_back({Vector::Zero(2), Vector::Constant(2, std::round(u(eng) * 4) / 4)});
  const auto w = uniform_weights(out.size());
  for (const char* s : {"exact", "eps:0.5", "quantile:10"}) {
    const auto p = fibers_by_variance(out, w, parse_fiber_scheme(s));
    std::vector<int> seen(out.size(), 0);
    for (const auto& g : p.groups) {
      for (std::size_t i : g) ++seen[i];
    }
    for (int c : seen) EXPECT_EQ(c, 1);
    EXPECT_NEAR(std::accumulate(p.masses.begin(), p.masses.end(), 0.0), 1.0, 1e-10);
  }
  const auto q = fibers_by_variance(out, w, parse_fiber_scheme("quantile:10"));
  ASSERT_EQ(q.groups.size(), 10u);
  for (const auto& g : q.groups) EXPECT_EQ(g.size(), 10u);
}

TEST(Gence, ExactMeanConstantVarianceIsOne) {
  std::vector<RegressorOutput> out;
  std::vector<Vector> y;
  for (int i = 0; i < 6; ++i) {
    Vector m(3);
    m << i, -i, 0.5 * i;
    out.push_back({m, Vector::Constant(3, 0.7)});
    y.push_back(m);
  }
  const auto w = uniform_weights(6);
  EXPECT_NEAR(gence(out, y, w, one_fiber(6)).value, 1.0, 1e-15);
  EXPECT_NEAR(gence_sq(out, y, w, one_fiber(6)).value, 1.0, 1e-15);
}

TEST(Gence, SquaredResidualEqualToVarianceGivesZero) {
  std::vector<RegressorOutput> out;
  std::vector<Vector> y;
  for (int i = 0; i < 4; ++i) {
    out.push_back({scalar(1.0), scalar(0.25)});
    y.push_back(scalar(i % 2 ? 1.5 : 0.5));
  }
  EXPECT_NEAR(gence_sq(out, y, uniform_weights(4), one_fiber(4)).value, 0.0, 1e-15);
}

TEST(Gence, VarianceUnderflowAndCoverage) {
  std::vector<RegressorOutput> out{{scalar(0.0), scalar(1e-13)}};
  std::vector<Vector> y{scalar(0.0)};
  EXPECT_THROW(gence(out, y, uniform_weights(1), one_fiber(1)), NumericError);
  std::vector<RegressorOutput> two{{scalar(0.0), scalar(1.0)}, {scalar(0.0), scalar(1.0)}};
  std::vector<Vector> y2{scalar(0.0), scalar(0.0)};
  EXPECT_THROW(gence(two, y2, uniform_weights(2), one_fiber(1)), DataError);
}

// Per-sample oracle: exact fibers with distinct s make every sample its own
// fiber, so GENCE is the plain mean of the normalized per-sample terms.
TEST(Gence, CalibratedGaussianMonteCarlo) {
  gen::CalibratedGaussianParams p;
  p.n = 200000;
  p.seed = 21;
  const auto ds = gen::calibrated_gaussian(p);
  std::vector<RegressorOutput> out;
  std::vector<double> t_abs, t_sq;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double mu = (*ds.annotation_mean)[i](0);
    const double s = (*ds.annotation_variance)[i](0);
    const double e = (*ds.targets)[i](0) - mu;
    out.push_back({scalar(mu), scalar(s)});
    const double d = std::sqrt(2.0 * s / std::numbers::pi);
    t_abs.push_back((d - std::abs(e)) * (d - std::abs(e)) / (d * d));
    t_sq.push_back((s - e * e) * (s - e * e) / (s * s));
  }
  auto mean_se = [](const std::vector<double>& t) {
    const double m = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    double v = 0.0;
    for (double x : t) v += (x - m) * (x - m);
    return std::pair{m, std::sqrt(v / static_cast<double>(t.size() - 1) / static_cast<double>(t.size()))};
  };
  const auto [m_abs, se_abs] = mean_se(t_abs);
  const auto [m_sq, se_sq] = mean_se(t_sq);
  const auto fibers = fibers_by_variance(out, ds.weights);
  ASSERT_EQ(fibers.groups.size(), ds.size());
  const double g = gence(out, *ds.targets, ds.weights, fibers).value;
  const double gs = gence_sq(out, *ds.targets, ds.weights, fibers).value;
  EXPECT_NEAR(g, m_abs, 1e-10);
  EXPECT_NEAR(gs, m_sq, 1e-9);
  EXPECT_NEAR(g, kCalibratedGenceBaseline, 4.0 * se_abs);
  EXPECT_NEAR(gs, kCalibratedGenceSqBaseline, 4.0 * se_sq);
}

TEST(Gence, DimensionalScalingAndPermutationInvariance) {
  std::mt19937_64 eng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RegressorOutput> out;
    std::vector<Vector> y;
    for (int i = 0; i < 60; ++i) {
      Vector m(2), s(2), t(2);
      m << n(eng), n(eng);
      s << u(eng), u(eng);
      t << n(eng), n(eng);
      out.push_back({m, s});
      y.push_back(t);
    }
    const auto w = uniform_weights(out.size());
    const auto fibers = fibers_by_variance(out, w, parse_fiber_scheme("quantile:6"));
    const double g = gence(out, y, w, fibers).value;
    const double gs = gence_sq(out, y, w, fibers).value;
    EXPECT_GE(g, 0.0);
    const double c = 0.5 + trial;
    auto out2 = out;
    auto y2 = y;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out2[i].mean *= c;
      out2[i].variance *= c * c;
      y2[i] *= c;
    }
    EXPECT_NEAR(gence(out2, y2, w, fibers).value, g, 1e-10);
    EXPECT_NEAR(gence_sq(out2, y2, w, fibers).value, gs, 1e-10);

    auto f2 = fibers;
    for (auto& grp : f2.groups) std::reverse(grp.begin(), grp.end());
    EXPECT_NEAR(gence(out, y, w, f2).value, g, 1e-12);
  }
}

TEST(Regression, HandComputations) {
  const std::vector<Vector> p{scalar(0.0), scalar(1.0)};
  const std::vector<Vector> t{scalar(1.0), scalar(1.0)};
  const auto w = uniform_weights(2);
  EXPECT_DOUBLE_EQ(regression_error(p, t, w), 0.5);
  EXPECT_DOUBLE_EQ(regression_error(t, t, w), 0.0);
  const std::vector<std::size_t> mask{0};
  EXPECT_DOUBLE_EQ(regression_error(p, t, w, std::span<const std::size_t>(mask)), 1.0);
  const std::vector<std::size_t> none;
  EXPECT_THROW(regression_error(p, t, w, std::span<const std::size_t>(none)), DataError);
}

TEST(Bleed, HandComputationsAndIdentity) {
  const std::vector<Vector> zero{scalar(0.0), scalar(0.0)};
  const std::vector<Vector> pred{scalar(0.1), scalar(0.3)};
  const auto w = uniform_weights(2);
  EXPECT_EQ(aleatoric_bleed(zero, zero, w), 0.0);
  EXPECT_NEAR(aleatoric_bleed(pred, zero, w), 0.05, 1e-15);
  EXPECT_EQ(aleatoric_bleed(pred, zero, w), regression_error(pred, zero, w));
  const std::vector<Vector> neg{scalar(-0.1), scalar(0.3)};
  EXPECT_THROW(aleatoric_bleed(neg, zero, w), DataError);
}

TEST(Example51, MinimizedPredictorErrorsAndGence) {
  const auto ds = gen::pointcloud_gence();
  const auto& f = *ds.targets;
  const Vector bc = 0.5 * (f[2] + f[3]);
  const std::vector<Vector> pred{f[0], f[1], bc, bc, f[4]};
  const std::vector<std::size_t> s1{0, 1, 2, 3}, s2{4};
  EXPECT_NEAR(regression_error(pred, f, ds.weights, std::span<const std::size_t>(s1)), std::numbers::pi / 8.0, 1e-15);
  EXPECT_EQ(regression_error(pred, f, ds.weights, std::span<const std::size_t>(s2)), 0.0);

  for (double s : {0.25, 1.0, 4.0}) {
    std::vector<RegressorOutput> out;
    for (std::size_t i = 0; i < 5; ++i) out.push_back({pred[i], Vector::Constant(2, i < 4 ? s : 2.0)});
    const auto fibers = fibers_by_variance(out, ds.weights);
    ASSERT_EQ(fibers.groups.size(), 2u);
    const double g = gence(out, f, ds.weights, fibers).value;
    const std::vector<GenceFiberInput> in{{0.5, std::numbers::pi / 8.0, Vector::Constant(2, s)},
                                          {0.5, 0.0, Vector::Constant(2, 2.0)}};
    EXPECT_LE(g, gence_upper(in).value);
  }
}
