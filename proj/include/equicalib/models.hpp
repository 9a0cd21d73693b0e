#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equicalib/dataset.hpp"
#include "equicalib/error.hpp"
#include "equicalib/evidential.hpp"
#include "equicalib/group.hpp"
#include "equicalib/metrics.hpp"
#include "equicalib/nn.hpp"
#include "equicalib/rng.hpp"

namespace equicalib {

enum class InvariantMode { none, drop_z, orbit_average };

inline InvariantMode parse_invariant_mode(std::string_view s) {
  if (s == "none") return InvariantMode::none;
  if (s == "drop-z") return InvariantMode::drop_z;
  if (s == "orbit-average") return InvariantMode::orbit_average;
  throw UsageError("unknown invariant mode '" + std::string(s) + "' (expected none|drop-z|orbit-average)");
}

struct MlpConfig {
  std::vector<int> layer_widths{32, 32}; // hidden widths
  nn::Activation activation = nn::Activation::tanh;
  std::uint64_t seed = 0;
  double learning_rate = 0.01;
  int epochs = 200;
  int batch_size = 64;
  InvariantMode invariant_mode = InvariantMode::none;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  double clip = 10.0;
  double variance_init = 0.1; // initial predicted variance of regression heads

  void validate() const {
    for (int w : layer_widths) {
      if (w < 1) throw UsageError("layer widths must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (!(variance_init > 0.0)) throw UsageError("variance_init must be positive");
  }
};

namespace detail {

inline std::vector<int> full_widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

// Row-major flattening of a point into one row.
inline Eigen::RowVectorXd flatten(const Point& x) {
  Eigen::RowVectorXd r(x.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) r(k++) = x(i, j);
  }
  return r;
}

inline std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& eng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), eng);
  return idx;
}

inline Matrix take_rows(const Matrix& X, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

[[noreturn]] inline void diverged(int epoch) {
  throw NumericError("training diverged at epoch " + std::to_string(epoch));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Classification

class Classifier {
public:
  Classifier() = default;
  [[nodiscard]] int n_classes() const noexcept { return n_classes_; }
  [[nodiscard]] InvariantMode mode() const noexcept { return mode_; }
  [[nodiscard]] nn::Mlp& net() noexcept { return net_; }
  [[nodiscard]] const nn::Mlp& net() const noexcept { return net_; }

  /// Feature rows seen by the network, one matrix per averaged view.
  [[nodiscard]] std::vector<Matrix> views(std::span<const Point> xs) const {
    const std::size_t n_views = mode_ == InvariantMode::orbit_average ? group_->order() : 1;
    std::vector<Matrix> out;
    for (std::size_t g = 0; g < n_views; ++g) {
      Matrix X;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const Point p = mode_ == InvariantMode::orbit_average ? group_->apply(g, xs[i]) : xs[i];
        const Eigen::RowVectorXd f = features(p);
        if (i == 0) X.resize(static_cast<Eigen::Index>(xs.size()), f.size());
        X.row(static_cast<Eigen::Index>(i)) = f;
      }
      out.push_back(std::move(X));
    }
    return out;
  }

  [[nodiscard]] Matrix logits(const std::vector<Matrix>& views) const {
    Matrix L = net_.forward(views[0]);
    for (std::size_t g = 1; g < views.size(); ++g) L += net_.forward(views[g]);
    return L / static_cast<double>(views.size());
  }

  [[nodiscard]] static Matrix softmax(const Matrix& L) {
    Matrix P = L;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      P.row(i).array() -= P.row(i).maxCoeff();
      P.row(i) = P.row(i).array().exp().matrix();
      P.row(i) /= P.row(i).sum();
    }
    return P;
  }

  [[nodiscard]] Matrix probabilities(std::span<const Point> xs) const { return softmax(logits(views(xs))); }

  [[nodiscard]] std::vector<ClassifierOutput> predict(std::span<const Point> xs) const {
    const Matrix P = probabilities(xs);
    std::vector<ClassifierOutput> out;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      Eigen::Index k = 0;
      const double c = P.row(i).maxCoeff(&k);
      out.push_back({static_cast<int>(k), c});
    }
    return out;
  }

  /// Weighted mean cross-entropy over the rows of `views`; fills the parameter
  /// gradient when `grad` is given.
  double loss(const std::vector<Matrix>& views, std::span<const int> labels, std::span<const double> w,
              Vector* grad) const {
    std::vector<nn::Mlp::Cache> caches(views.size());
    Matrix L = net_.forward(views[0], grad ? &caches[0] : nullptr);
    for (std::size_t g = 1; g < views.size(); ++g) L += net_.forward(views[g], grad ? &caches[g] : nullptr);
    L /= static_cast<double>(views.size());
    const Matrix P = softmax(L);
    double total_w = 0.0;
    for (double x : w) total_w += x;
    double value = 0.0;
    Matrix dL = P;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      const int y = labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= n_classes_) throw DataError("label outside classifier range");
      const double wi = w[static_cast<std::size_t>(i)] / total_w;
      value -= wi * std::log(std::max(P(i, y), 1e-300));
      dL(i, y) -= 1.0;
      dL.row(i) *= wi;
    }
    if (grad) {
      dL /= static_cast<double>(views.size());
      *grad = net_.backward(caches[0], dL);
      for (std::size_t g = 1; g < views.size(); ++g) *grad += net_.backward(caches[g], dL);
    }
    return value;
  }

private:
  // drop-z keeps every coordinate of each row except the last.
  [[nodiscard]] Eigen::RowVectorXd features(const Point& x) const {
    if (mode_ != InvariantMode::drop_z) return detail::flatten(x);
    return detail::flatten(x.leftCols(x.cols() - 1));
  }

  InvariantMode mode_ = InvariantMode::none;
  std::optional<FiniteGroup> group_;
  int n_classes_ = 2;
  nn::Mlp net_;

  friend Classifier make_classifier(const MlpConfig&, const WeightedDataset&, std::optional<FiniteGroup>);
};

inline Classifier make_classifier(const MlpConfig& cfg, const WeightedDataset& ds,
                                  std::optional<FiniteGroup> group = std::nullopt) {
  if (!ds.has_labels() || ds.size() == 0) throw DataError("classifier training needs a labeled dataset");
  const int n_classes = std::max(2, *std::max_element(ds.labels->begin(), ds.labels->end()) + 1);
  const Point& p0 = ds.points[0];
  Classifier model;
  model.mode_ = cfg.invariant_mode;
  model.group_ = std::move(group);
  model.n_classes_ = n_classes;
  cfg.validate();
  if (model.mode_ == InvariantMode::orbit_average && !model.group_) throw UsageError("orbit-average mode needs a group");
  if (model.mode_ == InvariantMode::drop_z && p0.cols() < 2) throw UsageError("drop-z needs at least two columns");
  const Eigen::Index width = model.mode_ == InvariantMode::drop_z ? p0.rows() * (p0.cols() - 1) : p0.size();
  auto eng = SeedTree(cfg.seed).child("classifier/init").engine();
  model.net_ = nn::Mlp(detail::full_widths(static_cast<int>(width), cfg.layer_widths, n_classes), cfg.activation, eng);
  return model;
}

inline Classifier train_classifier(const WeightedDataset& ds, const MlpConfig& cfg,
                                   std::optional<FiniteGroup> group = std::nullopt) {
  Classifier model = make_classifier(cfg, ds, std::move(group));
  const auto views = model.views(ds.points);
  const std::size_t n = ds.size();
  auto eng = SeedTree(cfg.seed).child("classifier/batches").engine();
  Vector theta = model.net().parameters();
  nn::Optimizer opt(cfg.optimizer, cfg.learning_rate, theta.size(), cfg.clip);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = detail::shuffled(n, eng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      std::vector<Matrix> bv;
      for (const auto& v : views) bv.push_back(detail::take_rows(v, idx));
      std::vector<int> by;
      std::vector<double> bw;
      for (std::size_t i : idx) {
        by.push_back((*ds.labels)[i]);
        bw.push_back(ds.weights[i]);
      }
      Vector g;
      const double l = model.loss(bv, by, bw, &g);
      if (!std::isfinite(l) || !g.allFinite()) detail::diverged(epoch);
      epoch_loss += l;
      opt.step(theta, std::move(g));
      model.net().set_parameters(theta);
    }
    if (!std::isfinite(epoch_loss)) detail::diverged(epoch);
  }
  return model;
}

struct ClassifierEval {
  double accuracy = 0.0;
  double ece = 0.0;
  std::vector<BinRow> bins;
};

inline ClassifierEval evaluate_classifier(const Classifier& model, const WeightedDataset& ds,
                                          int n_bins = kDefaultEceBins) {
  if (!ds.has_labels()) throw DataError("evaluation needs labels");
  const auto out = model.predict(ds.points);
  const auto e = ece_binned(out, *ds.labels, ds.weights, n_bins);
  return {weighted_accuracy(out, *ds.labels, ds.weights), e.ece, e.bins};
}

// ---------------------------------------------------------------------------
// Vector regression

enum class RegressorKind { unconstrained, radial_equivariant };

inline RegressorKind parse_regressor_kind(std::string_view s) {
  if (s == "unconstrained" || s == "mlp") return RegressorKind::unconstrained;
  if (s == "radial" || s == "radial_equivariant" || s == "radial-equivariant") return RegressorKind::radial_equivariant;
  throw UsageError("unknown regressor kind '" + std::string(s) + "' (expected unconstrained|radial)");
}

inline std::string to_string(RegressorKind k) {
  return k == RegressorKind::unconstrained ? "unconstrained" : "radial";
}

/// Gaussian mean/variance regressor. The unconstrained kind maps the flattened
/// input through two MLPs. The radial kind predicts mean g(|x|) x and an
/// isotropic variance softplus(h(|x|)), so it is exactly equivariant under
/// every orthogonal map of the input.
class VectorRegressor {
public:
  VectorRegressor() = default;
  VectorRegressor(RegressorKind kind, const MlpConfig& cfg, Eigen::Index input_dim, Eigen::Index output_dim)
      : kind_(kind), out_dim_(output_dim) {
    cfg.validate();
    if (kind == RegressorKind::radial_equivariant && input_dim != output_dim) {
      throw UsageError("radial model needs input and output of equal dimension");
    }
    const int in = kind == RegressorKind::radial_equivariant ? 1 : static_cast<int>(input_dim);
    const int out = kind == RegressorKind::radial_equivariant ? 1 : static_cast<int>(output_dim);
    const SeedTree root(cfg.seed);
    auto e1 = root.child("regressor/mean").engine();
    auto e2 = root.child("regressor/variance").engine();
    mean_net_ = nn::Mlp(detail::full_widths(in, cfg.layer_widths, out), cfg.activation, e1);
    var_net_ = nn::Mlp(detail::full_widths(in, cfg.layer_widths, out), cfg.activation, e2);
    const std::size_t last = var_net_.n_layers() - 1;
    var_net_.weight(last).setZero();
    var_net_.bias(last).setConstant(nn::softplus_inverse(cfg.variance_init));
  }

  [[nodiscard]] RegressorKind kind() const noexcept { return kind_; }
  [[nodiscard]] Eigen::Index output_dim() const noexcept { return out_dim_; }

  [[nodiscard]] Matrix design(std::span<const Point> xs) const {
    Matrix X(static_cast<Eigen::Index>(xs.size()), kind_ == RegressorKind::radial_equivariant ? 1 : xs[0].size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (kind_ == RegressorKind::radial_equivariant) {
        X(r, 0) = xs[i].norm();
      } else {
        X.row(r) = detail::flatten(xs[i]);
      }
    }
    return X;
  }

  [[nodiscard]] std::vector<RegressorOutput> predict(std::span<const Point> xs) const {
    if (xs.empty()) return {};
    const Matrix X = design(xs);
    const Matrix M = mean_net_.forward(X);
    const Matrix V = var_net_.forward(X);
    std::vector<RegressorOutput> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      RegressorOutput o;
      o.variance.resize(out_dim_);
      if (kind_ == RegressorKind::radial_equivariant) {
        o.mean = M(r, 0) * detail::flatten(xs[i]).transpose();
        o.variance.setConstant(nn::softplus(V(r, 0)));
      } else {
        o.mean = M.row(r).transpose();
        for (Eigen::Index d = 0; d < out_dim_; ++d) o.variance(d) = nn::softplus(V(r, d));
      }
      out.push_back(std::move(o));
    }
    return out;
  }

  [[nodiscard]] Vector parameters() const {
    Vector p(mean_net_.n_params() + var_net_.n_params());
    p << mean_net_.parameters(), var_net_.parameters();
    return p;
  }

  void set_parameters(const Vector& p) {
    mean_net_.set_parameters(p.head(mean_net_.n_params()));
    var_net_.set_parameters(p.tail(var_net_.n_params()));
  }

  /// Weighted mean over samples of 1/2 MSE + 1/2 beta-NLL, both averaged over
  /// output coordinates.
  double loss(std::span<const Point> xs, std::span<const Vector> ys, std::span<const double> w, double beta_exp,
              Vector* grad) const {
    const Matrix X = design(xs);
    nn::Mlp::Cache cm, cv;
    const Matrix M = mean_net_.forward(X, grad ? &cm : nullptr);
    const Matrix V = var_net_.forward(X, grad ? &cv : nullptr);
    Matrix dM = Matrix::Zero(M.rows(), M.cols());
    Matrix dV = Matrix::Zero(V.rows(), V.cols());
    double total_w = 0.0;
    for (double x : w) total_w += x;
    const double inv_d = 1.0 / static_cast<double>(out_dim_);
    double value = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double wi = w[i] / total_w;
      const Vector x = detail::flatten(xs[i]).transpose();
      if (ys[i].size() != out_dim_) throw DataError("target dimension mismatch");
      for (Eigen::Index d = 0; d < out_dim_; ++d) {
        const bool radial = kind_ == RegressorKind::radial_equivariant;
        const double raw_v = radial ? V(r, 0) : V(r, d);
        const double mu = radial ? M(r, 0) * x(d) : M(r, d);
        const double s2 = nn::softplus(raw_v);
        const double y = ys[i](d);
        const auto b = beta_nll(y, mu, s2, beta_exp);
        value += wi * inv_d * (0.5 * (y - mu) * (y - mu) + 0.5 * b.loss);
        const double d_mu = wi * inv_d * (-(y - mu) + 0.5 * b.d_mu);
        const double d_raw = wi * inv_d * 0.5 * b.d_sigma2 * nn::sigmoid(raw_v);
        if (radial) {
          dM(r, 0) += d_mu * x(d);
          dV(r, 0) += d_raw;
        } else {
          dM(r, d) += d_mu;
          dV(r, d) += d_raw;
        }
      }
    }
    if (grad) {
      grad->resize(mean_net_.n_params() + var_net_.n_params());
      *grad << mean_net_.backward(cm, dM), var_net_.backward(cv, dV);
    }
    return value;
  }

private:
  RegressorKind kind_ = RegressorKind::unconstrained;
  Eigen::Index out_dim_ = 0;
  nn::Mlp mean_net_;
  nn::Mlp var_net_;
};

inline VectorRegressor make_vector_regressor(const WeightedDataset& ds, RegressorKind kind, const MlpConfig& cfg) {
  if (!ds.has_targets() || ds.size() == 0) throw DataError("regressor training needs a dataset with targets");
  return VectorRegressor(kind, cfg, ds.points[0].size(), (*ds.targets)[0].size());
}

inline VectorRegressor train_vector_regressor(const WeightedDataset& ds, RegressorKind kind, const MlpConfig& cfg,
                                              double beta_exp = 1.0) {
  VectorRegressor model = make_vector_regressor(ds, kind, cfg);
  const std::size_t n = ds.size();
  auto eng = SeedTree(cfg.seed).child("regressor/batches").engine();
  Vector theta = model.parameters();
  nn::Optimizer opt(cfg.optimizer, cfg.learning_rate, theta.size(), cfg.clip);
  std::vector<Point> bx;
  std::vector<Vector> by;
  std::vector<double> bw;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = detail::shuffled(n, eng);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      bx.clear();
      by.clear();
      bw.clear();
      for (std::size_t k = start; k < stop; ++k) {
        bx.push_back(ds.points[order[k]]);
        by.push_back((*ds.targets)[order[k]]);
        bw.push_back(ds.weights[order[k]]);
      }
      Vector g;
      double l = 0.0;
      try {
        l = model.loss(bx, by, bw, beta_exp, &g);
      } catch (const NumericError&) {
        detail::diverged(epoch);
      }
      if (!std::isfinite(l) || !g.allFinite()) detail::diverged(epoch);
      opt.step(theta, std::move(g));
      model.set_parameters(theta);
    }
  }
  return model;
}

inline constexpr int kAngleSectors = 16;

struct AngleRow {
  int sector = 0;
  double angle_lo = 0.0;
  double angle_hi = 0.0;
  double mass = 0.0;
  double mse = 0.0;
  double beta_nll = 0.0;
};

struct RegressorEval {
  double mse = 0.0;
  double beta_nll = 0.0;
  double gence = 0.0; // NaN when a fiber variance underflows
  double bleed = 0.0;
  std::vector<AngleRow> angles;
};

/// Planar angle sector of the first two coordinates, in [0, kAngleSectors).
inline int angle_sector(const Point& x, int sectors = kAngleSectors) {
  const Vector v = detail::flatten(x).transpose();
  if (v.size() < 2) throw DataError("angle sectors need planar inputs");
  const double a = std::atan2(v(1), v(0)) + std::numbers::pi; // [0, 2pi]
  return std::min(sectors - 1, static_cast<int>(a / (2.0 * std::numbers::pi) * sectors));
}

/// MSE, mean beta-NLL, GENCE (10 variance quantile fibers) and aleatoric
/// bleed against an identically zero true variance.
inline RegressorEval evaluate_regressor(const VectorRegressor& model, const WeightedDataset& ds,
                                        double beta_exp = 1.0) {
  if (!ds.has_targets()) throw DataError("evaluation needs targets");
  const auto out = model.predict(ds.points);
  const auto& ys = *ds.targets;
  RegressorEval ev;
  std::vector<Vector> means, vars, zeros;
  std::vector<double> nll(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    means.push_back(out[i].mean);
    vars.push_back(out[i].variance);
    zeros.push_back(Vector::Zero(out[i].variance.size()));
    double s = 0.0;
    for (Eigen::Index d = 0; d < out[i].mean.size(); ++d) {
      s += beta_nll(ys[i](d), out[i].mean(d), out[i].variance(d), beta_exp).loss;
    }
    nll[i] = s / static_cast<double>(out[i].mean.size());
  }
  ev.mse = regression_error(means, ys, ds.weights);
  std::vector<double> wn(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) wn[i] = ds.weights[i] * nll[i];
  ev.beta_nll = numeric::pairwise_sum(wn);
  ev.bleed = aleatoric_bleed(vars, zeros, ds.weights);
  try {
    const auto fibers = fibers_by_variance(out, ds.weights, parse_fiber_scheme("quantile:10"));
    ev.gence = gence(out, ys, ds.weights, fibers).value;
  } catch (const NumericError&) {
    ev.gence = std::nan("");
  }
  std::vector<std::vector<std::size_t>> members(kAngleSectors);
  for (std::size_t i = 0; i < out.size(); ++i) members[static_cast<std::size_t>(angle_sector(ds.points[i]))].push_back(i);
  for (int s = 0; s < kAngleSectors; ++s) {
    AngleRow row;
    row.sector = s;
    row.angle_lo = -std::numbers::pi + 2.0 * std::numbers::pi * s / kAngleSectors;
    row.angle_hi = -std::numbers::pi + 2.0 * std::numbers::pi * (s + 1) / kAngleSectors;
    const auto& idx = members[static_cast<std::size_t>(s)];
    std::vector<double> w, e, l;
    for (std::size_t i : idx) {
      w.push_back(ds.weights[i]);
      e.push_back(ds.weights[i] * (means[i] - ys[i]).squaredNorm());
      l.push_back(ds.weights[i] * nll[i]);
    }
    row.mass = numeric::pairwise_sum(w);
    if (row.mass > 0.0) {
      row.mse = numeric::pairwise_sum(e) / row.mass;
      row.beta_nll = numeric::pairwise_sum(l) / row.mass;
    } else {
      row.mse = row.beta_nll = std::nan("");
    }
    ev.angles.push_back(row);
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Splits

struct Split {
  WeightedDataset train;
  WeightedDataset test;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
};

/// Seeded train/test split; with `stratify` each label class contributes
/// round(test_fraction * count) test samples.
inline Split train_test_split(const WeightedDataset& ds, double test_fraction, std::uint64_t seed,
                              bool stratify = true) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test fraction must lie in (0, 1)");
  auto eng = SeedTree(seed).child("split").engine();
  std::vector<std::vector<std::size_t>> strata;
  if (stratify && ds.has_labels()) {
    const int k = *std::max_element(ds.labels->begin(), ds.labels->end()) + 1;
    strata.resize(static_cast<std::size_t>(std::max(k, 1)));
    for (std::size_t i = 0; i < ds.size(); ++i) strata[static_cast<std::size_t>((*ds.labels)[i])].push_back(i);
  } else {
    strata.emplace_back(ds.size());
    std::iota(strata[0].begin(), strata[0].end(), 0);
  }
  Split s;
  for (auto& st : strata) {
    std::shuffle(st.begin(), st.end(), eng);
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(st.size())));
    s.test_idx.insert(s.test_idx.end(), st.begin(), st.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train_idx.insert(s.train_idx.end(), st.begin() + static_cast<std::ptrdiff_t>(n_test), st.end());
  }
  std::sort(s.train_idx.begin(), s.train_idx.end());
  std::sort(s.test_idx.begin(), s.test_idx.end());
  if (s.train_idx.empty() || s.test_idx.empty()) throw DataError("split leaves an empty side");
  s.train = ds.restrict(s.train_idx);
  s.test = ds.restrict(s.test_idx);
  return s;
}

} // namespace equicalib
