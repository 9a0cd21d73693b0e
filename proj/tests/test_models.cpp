#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "equicalib/generators.hpp"
#include "equicalib/group.hpp"
#include "equicalib/models.hpp"

using namespace equicalib;

namespace {

WeightedDataset xor_dataset() {
  WeightedDataset ds;
  ds.points = {row_point({0, 0}), row_point({0, 1}), row_point({1, 0}), row_point({1, 1})};
  ds.labels = std::vector<int>{0, 1, 1, 0};
  ds.weights = {0.25, 0.25, 0.25, 0.25};
  ds.validate();
  return ds;
}

WeightedDataset random_planar(int n, std::uint64_t seed, bool with_targets) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> N;
  WeightedDataset ds;
  std::vector<int> labels;
  std::vector<Vector> targets;
  for (int i = 0; i < n; ++i) {
    const double x = N(eng), y = N(eng);
    ds.points.push_back(row_point({x, y}));
    labels.push_back(x * y > 0 ? 1 : 0);
    Vector t(2);
    t << -y + 0.3 * x, x + 0.1 * y;
    targets.push_back(t);
    ds.weights.push_back(1.0 / n);
  }
  if (with_targets) {
    ds.targets = targets;
  } else {
    ds.labels = labels;
  }
  ds.validate();
  return ds;
}

MlpConfig small_config(std::uint64_t seed) {
  MlpConfig c;
  c.layer_widths = {6, 5};
  c.seed = seed;
  c.epochs = 5;
  c.batch_size = 8;
  return c;
}

template <class F>
void expect_gradient(F&& loss_at, const Vector& theta, const Vector& analytic, double h = 1e-6) {
  ASSERT_EQ(theta.size(), analytic.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vector tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    const double fd = (loss_at(tp) - loss_at(tm)) / (2.0 * h);
    EXPECT_NEAR(analytic(i), fd, 1e-6 * (1.0 + std::abs(fd))) << "parameter " << i;
  }
}

} // namespace

TEST(Mlp, LearnsXor) {
  MlpConfig c;
  c.layer_widths = {8};
  c.epochs = 400;
  c.batch_size = 4;
  c.learning_rate = 0.05;
  c.seed = 3;
  const auto ds = xor_dataset();
  const auto model = train_classifier(ds, c);
  const auto ev = evaluate_classifier(model, ds);
  EXPECT_EQ(ev.accuracy, 1.0);
}

TEST(Mlp, ParameterRoundTrip) {
  std::mt19937_64 eng(1);
  nn::Mlp net({3, 4, 2}, nn::Activation::relu, eng);
  EXPECT_EQ(net.n_params(), 3 * 4 + 4 + 4 * 2 + 2);
  Vector p = net.parameters();
  p.array() += 0.5;
  net.set_parameters(p);
  EXPECT_EQ(net.parameters(), p);
}

TEST(Optimizer, ClipsGlobalNorm) {
  nn::Optimizer opt(nn::OptimizerKind::momentum, 1.0, 2, 10.0);
  Vector theta = Vector::Zero(2);
  Vector g(2);
  g << 60.0, 80.0;
  opt.step(theta, g);
  EXPECT_NEAR(theta.norm(), 10.0, 1e-12);
  EXPECT_NEAR(theta(0), -6.0, 1e-12);
  EXPECT_THROW(nn::Optimizer(nn::OptimizerKind::adam, 0.0, 2), UsageError);
  EXPECT_THROW(nn::parse_optimizer("sgd"), UsageError);
}

TEST(Classifier, DropZIsBitwiseZSwapInvariant) {
  const auto ds = gen::swiss_rolls({0.5, 40, 8, 11});
  MlpConfig c = small_config(4);
  c.invariant_mode = InvariantMode::drop_z;
  const auto model = train_classifier(ds, c);
  const auto g = build_group("z-swap", 3);
  const Matrix P = model.probabilities(ds.points);
  for (std::size_t e = 0; e < g.order(); ++e) {
    std::vector<Point> moved;
    for (const auto& p : ds.points) moved.push_back(g.apply(e, p));
    EXPECT_TRUE(model.probabilities(moved) == P) << "element " << e;
  }
}

TEST(Classifier, OrbitAverageIsInvariant) {
  const auto ds = random_planar(30, 5, false);
  const auto g = build_group("dihedral:4");
  MlpConfig c = small_config(6);
  c.invariant_mode = InvariantMode::orbit_average;
  const auto model = make_classifier(c, ds, g);
  const Matrix P = model.probabilities(ds.points);
  for (std::size_t e = 0; e < g.order(); ++e) {
    std::vector<Point> moved;
    for (const auto& p : ds.points) moved.push_back(g.apply(e, p));
    EXPECT_LT((model.probabilities(moved) - P).cwiseAbs().maxCoeff(), 1e-12) << "element " << e;
  }
  MlpConfig bad = c;
  EXPECT_THROW(make_classifier(bad, ds), UsageError);
}

TEST(Classifier, BackpropMatchesFiniteDifferences) {
  const auto ds = random_planar(12, 7, false);
  for (auto mode : {InvariantMode::none, InvariantMode::orbit_average}) {
    MlpConfig c = small_config(8);
    c.invariant_mode = mode;
    auto model = make_classifier(c, ds, build_group("cyclic:3"));
    const auto views = model.views(ds.points);
    Vector g;
    model.loss(views, *ds.labels, ds.weights, &g);
    const Vector theta = model.net().parameters();
    expect_gradient(
        [&](const Vector& t) {
          model.net().set_parameters(t);
          return model.loss(views, *ds.labels, ds.weights, nullptr);
        },
        theta, g);
  }
}

// Loss rebuilt from predict() with the beta-NLL weight sigma2^beta frozen at
// the expansion point, so its derivative is the stop-gradient gradient.
double frozen_loss(const VectorRegressor& model, const WeightedDataset& ds, double beta, const std::vector<Vector>& c) {
  const auto out = model.predict(ds.points);
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Eigen::Index d = out[i].mean.size();
    for (Eigen::Index k = 0; k < d; ++k) {
      const double r = (*ds.targets)[i](k) - out[i].mean(k);
      const double s2 = out[i].variance(k);
      const double nll = 0.5 * std::log(s2) + r * r / (2.0 * s2);
      total += ds.weights[i] / d * (0.5 * r * r + 0.5 * c[i](k) * nll);
    }
  }
  return total;
}

TEST(Regressor, BackpropMatchesFiniteDifferences) {
  const auto ds = random_planar(10, 9, true);
  for (auto kind : {RegressorKind::unconstrained, RegressorKind::radial_equivariant}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      auto model = make_vector_regressor(ds, kind, small_config(10));
      Vector theta = model.parameters();
      std::mt19937_64 eng(12);
      std::normal_distribution<double> N(0.0, 0.3);
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += N(eng);
      model.set_parameters(theta);
      std::vector<Vector> c;
      for (const auto& o : model.predict(ds.points)) c.push_back(o.variance.array().pow(beta).matrix());
      Vector g;
      const double value = model.loss(ds.points, *ds.targets, ds.weights, beta, &g);
      EXPECT_NEAR(value, frozen_loss(model, ds, beta, c), 1e-12);
      expect_gradient(
          [&](const Vector& t) {
            model.set_parameters(t);
            return frozen_loss(model, ds, beta, c);
          },
          theta, g);
    }
  }
}

TEST(Regressor, RadialModelIsRotationEquivariant) {
  const auto ds = random_planar(25, 13, true);
  MlpConfig c = small_config(14);
  c.epochs = 3;
  const auto model = train_vector_regressor(ds, RegressorKind::radial_equivariant, c);
  const auto base = model.predict(ds.points);
  std::mt19937_64 eng(15);
  std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = U(eng);
    Eigen::Matrix2d R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    std::vector<Point> rotated;
    for (const auto& p : ds.points) rotated.push_back((R * p.transpose()).transpose());
    const auto out = model.predict(rotated);
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_LT((out[i].mean - R * base[i].mean).norm(), 1e-10);
      EXPECT_LT((out[i].variance - base[i].variance).norm(), 1e-10);
    }
  }
}

TEST(Regressor, VarianceInitControlsInitialBleed) {
  const auto ds = random_planar(20, 16, true);
  for (auto kind : {RegressorKind::unconstrained, RegressorKind::radial_equivariant}) {
    MlpConfig c = small_config(17);
    c.variance_init = 1e-6;
    const auto model = make_vector_regressor(ds, kind, c);
    for (const auto& o : model.predict(ds.points)) {
      EXPECT_NEAR(o.variance(0), 1e-6, 1e-12);
      EXPECT_NEAR(o.variance(1), 1e-6, 1e-12);
    }
    EXPECT_LT(evaluate_regressor(model, ds).bleed, 1e-11);
  }
}

TEST(Training, BitReproducibleForFixedSeed) {
  const auto ds = random_planar(40, 18, false);
  const auto a = train_classifier(ds, small_config(19));
  const auto b = train_classifier(ds, small_config(19));
  const auto c = train_classifier(ds, small_config(20));
  EXPECT_TRUE(a.net().parameters() == b.net().parameters());
  EXPECT_FALSE(a.net().parameters() == c.net().parameters());

  const auto rd = random_planar(40, 21, true);
  const auto r1 = train_vector_regressor(rd, RegressorKind::unconstrained, small_config(22));
  const auto r2 = train_vector_regressor(rd, RegressorKind::unconstrained, small_config(22));
  EXPECT_TRUE(r1.parameters() == r2.parameters());
}

TEST(Training, DivergenceRaisesNumericError) {
  auto ds = random_planar(16, 23, true);
  for (auto& t : *ds.targets) t *= 1e200;
  EXPECT_THROW(train_vector_regressor(ds, RegressorKind::unconstrained, small_config(24)), NumericError);
}

TEST(Training, RejectsBadConfig) {
  const auto ds = xor_dataset();
  MlpConfig c;
  c.batch_size = 0;
  EXPECT_THROW(train_classifier(ds, c), UsageError);
  c = MlpConfig{};
  c.layer_widths = {4, 0};
  EXPECT_THROW(train_classifier(ds, c), UsageError);
  c = MlpConfig{};
  c.variance_init = 0.0;
  EXPECT_THROW(c.validate(), UsageError);
  EXPECT_EQ(parse_invariant_mode("drop-z"), InvariantMode::drop_z);
  EXPECT_THROW(parse_invariant_mode("mirror"), UsageError);
}

TEST(Split, StratifiedAndDisjoint) {
  const auto ds = gen::swiss_rolls({0.25, 50, 8, 25});
  const auto s = train_test_split(ds, 0.2, 26, true);
  EXPECT_EQ(s.train_idx.size() + s.test_idx.size(), ds.size());
  std::vector<int> seen(ds.size(), 0);
  for (auto i : s.train_idx) ++seen[i];
  for (auto i : s.test_idx) ++seen[i];
  for (int v : seen) EXPECT_EQ(v, 1);
  std::map<int, int> total, test;
  for (int l : *ds.labels) ++total[l];
  for (auto i : s.test_idx) ++test[(*ds.labels)[i]];
  for (const auto& [l, n] : total) EXPECT_EQ(test[l], std::lround(0.2 * n)) << "label " << l;
  EXPECT_NEAR(s.test.total_weight(), 1.0, 1e-12);
  const auto again = train_test_split(ds, 0.2, 26, true);
  EXPECT_EQ(again.test_idx, s.test_idx);
  EXPECT_THROW(train_test_split(ds, 1.0, 26), UsageError);
}

TEST(Evaluation, AngleSectorsCoverThePlane) {
  const auto ds = gen::vector_field(gen::VectorField::sinusoidal, 300, 3.0, 27);
  const auto model = make_vector_regressor(ds, RegressorKind::unconstrained, small_config(28));
  const auto ev = evaluate_regressor(model, ds);
  ASSERT_EQ(ev.angles.size(), static_cast<std::size_t>(kAngleSectors));
  double mass = 0.0;
  for (std::size_t s = 0; s < ev.angles.size(); ++s) {
    const auto& a = ev.angles[s];
    EXPECT_EQ(a.sector, static_cast<int>(s));
    EXPECT_NEAR(a.angle_hi - a.angle_lo, 2.0 * std::numbers::pi / kAngleSectors, 1e-12);
    mass += a.mass;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(ev.angles.front().angle_lo, -std::numbers::pi, 1e-15);
  EXPECT_NEAR(ev.angles.back().angle_hi, std::numbers::pi, 1e-15);
  EXPECT_EQ(angle_sector(row_point({1.0, 1e-9})), kAngleSectors / 2);
  EXPECT_EQ(angle_sector(row_point({-1.0, -1e-9})), 0);
}
