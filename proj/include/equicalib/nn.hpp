#pragma once

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "equicalib/error.hpp"

namespace equicalib::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { relu, tanh };

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw UsageError("unknown activation '" + std::string(s) + "' (expected relu|tanh)");
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}
/// softplus^{-1}(v) for v > 0.
inline double softplus_inverse(double v) {
  if (!(v > 0.0)) throw UsageError("softplus_inverse needs v > 0");
  return v > 30.0 ? v : std::log(std::expm1(v));
}

/// Fully connected network, samples as rows: A_{l+1} = act(A_l W_l + b_l),
/// with a linear last layer.
class Mlp {
public:
  struct Cache {
    std::vector<Matrix> inputs; // input of each layer
    std::vector<Matrix> pre;    // pre-activation of each hidden layer
  };

  Mlp() = default;

  /// `widths` = {input, hidden..., output}.
  Mlp(const std::vector<int>& widths, Activation act, std::mt19937_64& eng) : act_(act) {
    if (widths.size() < 2) throw UsageError("an MLP needs at least input and output widths");
    for (int w : widths) {
      if (w < 1) throw UsageError("layer widths must be >= 1");
    }
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const double fan_in = widths[l];
      const double scale = act == Activation::relu ? std::sqrt(2.0 / fan_in) : std::sqrt(1.0 / fan_in);
      std::normal_distribution<double> n(0.0, scale);
      Matrix W(widths[l], widths[l + 1]);
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = n(eng);
      }
      W_.push_back(std::move(W));
      b_.push_back(Vector::Zero(widths[l + 1]));
    }
  }

  [[nodiscard]] std::size_t n_layers() const noexcept { return W_.size(); }
  [[nodiscard]] Eigen::Index input_dim() const { return W_.front().rows(); }
  [[nodiscard]] Eigen::Index output_dim() const { return W_.back().cols(); }
  [[nodiscard]] Matrix& weight(std::size_t l) { return W_.at(l); }
  [[nodiscard]] Vector& bias(std::size_t l) { return b_.at(l); }

  [[nodiscard]] Matrix forward(const Matrix& X, Cache* cache = nullptr) const {
    if (X.cols() != input_dim()) throw DataError("MLP input width mismatch");
    if (cache) {
      cache->inputs.clear();
      cache->pre.clear();
    }
    Matrix A = X;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      if (cache) cache->inputs.push_back(A);
      Matrix Z = A * W_[l];
      Z.rowwise() += b_[l].transpose();
      if (l + 1 == W_.size()) return Z;
      if (cache) cache->pre.push_back(Z);
      A = activate(Z);
    }
    return A;
  }

  /// Gradient of sum(dOut .* output) with respect to the flattened parameters.
  [[nodiscard]] Vector backward(const Cache& cache, const Matrix& dOut) const {
    Vector g(n_params());
    Eigen::Index off = n_params();
    Matrix dZ = dOut;
    for (std::size_t l = W_.size(); l-- > 0;) {
      const Eigen::Index nb = b_[l].size();
      const Eigen::Index nw = W_[l].size();
      off -= nb;
      g.segment(off, nb) = dZ.colwise().sum().transpose();
      off -= nw;
      Matrix dW = cache.inputs[l].transpose() * dZ;
      g.segment(off, nw) = Eigen::Map<const Vector>(dW.data(), nw);
      if (l == 0) break;
      Matrix dA = dZ * W_[l].transpose();
      dZ = dA.cwiseProduct(activate_grad(cache.pre[l - 1]));
    }
    return g;
  }

  [[nodiscard]] Eigen::Index n_params() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) n += W_[l].size() + b_[l].size();
    return n;
  }

  [[nodiscard]] Vector parameters() const {
    Vector p(n_params());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      p.segment(off, W_[l].size()) = Eigen::Map<const Vector>(W_[l].data(), W_[l].size());
      off += W_[l].size();
      p.segment(off, b_[l].size()) = b_[l];
      off += b_[l].size();
    }
    return p;
  }

  void set_parameters(const Vector& p) {
    if (p.size() != n_params()) throw UsageError("parameter vector size mismatch");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      Eigen::Map<Vector>(W_[l].data(), W_[l].size()) = p.segment(off, W_[l].size());
      off += W_[l].size();
      b_[l] = p.segment(off, b_[l].size());
      off += b_[l].size();
    }
  }

private:
  [[nodiscard]] Matrix activate(const Matrix& Z) const {
    if (act_ == Activation::relu) return Z.cwiseMax(0.0);
    return Z.array().tanh().matrix();
  }
  [[nodiscard]] Matrix activate_grad(const Matrix& Z) const {
    if (act_ == Activation::relu) return (Z.array() > 0.0).cast<double>().matrix();
    return (1.0 - Z.array().tanh().square()).matrix();
  }

  Activation act_ = Activation::tanh;
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
};

enum class OptimizerKind { momentum, adam };

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "momentum") return OptimizerKind::momentum;
  if (s == "adam") return OptimizerKind::adam;
  throw UsageError("unknown optimizer '" + std::string(s) + "' (expected momentum|adam)");
}

/// Momentum SGD or Adam over a flat parameter vector, with global gradient
/// norm clipping.
class Optimizer {
public:
  Optimizer(OptimizerKind kind, double lr, Eigen::Index n, double clip = 10.0, double momentum = 0.9)
      : kind_(kind), lr_(lr), clip_(clip), momentum_(momentum), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {
    if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
  }

  void step(Vector& theta, Vector grad) {
    const double norm = grad.norm();
    if (clip_ > 0.0 && norm > clip_) grad *= clip_ / norm;
    if (kind_ == OptimizerKind::momentum) {
      m_ = momentum_ * m_ - lr_ * grad;
      theta += m_;
      return;
    }
    ++t_;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m_ = b1 * m_ + (1.0 - b1) * grad;
    v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

private:
  OptimizerKind kind_;
  double lr_;
  double clip_;
  double momentum_;
  Vector m_, v_;
  int t_ = 0;
};

} // namespace equicalib::nn
