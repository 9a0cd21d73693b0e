#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "equicalib/error.hpp"

namespace equicalib {

/// Normal-inverse-gamma evidential parameters.
struct NIGParams {
  double gamma = 0.0;
  double nu = 1.0;
  double alpha = 2.0;
  double beta = 1.0;
};

struct UncertaintySummary {
  double prediction = 0.0;
  double aleatoric = 0.0;
  double epistemic = 0.0;
};

inline void validate(const NIGParams& p) {
  if (!(p.nu > 0.0)) throw UsageError("NIG parameters need nu > 0");
  if (!(p.alpha > 1.0)) throw UsageError("NIG parameters need alpha > 1");
  if (!(p.beta > 0.0)) throw UsageError("NIG parameters need beta > 0");
}

inline double student_t_pdf(double t, double mu, double sigma, double nu_df) {
  if (!(sigma > 0.0) || !(nu_df > 0.0)) throw UsageError("student_t_pdf needs sigma > 0 and nu > 0");
  const double z = (t - mu) / sigma;
  const double log_norm = std::lgamma(0.5 * (nu_df + 1.0)) - std::lgamma(0.5 * nu_df) -
                          0.5 * std::log(std::numbers::pi * nu_df) - std::log(sigma);
  return std::exp(log_norm - 0.5 * (nu_df + 1.0) * std::log1p(z * z / nu_df));
}

/// (E[mu], E[sigma^2], Var[mu]) = (gamma, beta/(alpha-1), beta/(nu(alpha-1))).
inline UncertaintySummary nig_summaries(const NIGParams& p) {
  validate(p);
  const double epistemic = p.beta / (p.nu * (p.alpha - 1.0));
  return {p.gamma, p.nu * epistemic, epistemic};
}

struct NIGGradient {
  double gamma = 0.0;
  double nu = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct EvidentialLoss {
  double nll = 0.0;
  double regularizer = 0.0; // |y - gamma| (2 nu + alpha)
  double total = 0.0;
  NIGGradient grad;
};

/// NIG negative log-likelihood plus lambda * |y - gamma| (2 nu + alpha), with
/// Omega = 2 beta (1 + nu). Gradients are analytic; the regularizer's
/// subgradient in gamma is 0 at y = gamma.
inline EvidentialLoss evidential_nll(double y, const NIGParams& p, double lambda_reg) {
  validate(p);
  const double r = y - p.gamma;
  const double omega = 2.0 * p.beta * (1.0 + p.nu);
  const double d = r * r * p.nu + omega;
  const double a_half = p.alpha + 0.5;

  EvidentialLoss out;
  out.nll = 0.5 * std::log(std::numbers::pi / p.nu) - p.alpha * std::log(omega) + a_half * std::log(d) +
            std::lgamma(p.alpha) - std::lgamma(a_half);
  const double abs_r = std::abs(r);
  out.regularizer = abs_r * (2.0 * p.nu + p.alpha);
  out.total = out.nll + lambda_reg * out.regularizer;

  const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  out.grad.gamma = a_half * (-2.0 * r * p.nu) / d - lambda_reg * sign * (2.0 * p.nu + p.alpha);
  out.grad.nu = -0.5 / p.nu - p.alpha * 2.0 * p.beta / omega + a_half * (r * r + 2.0 * p.beta) / d +
                lambda_reg * 2.0 * abs_r;
  out.grad.alpha = -std::log(omega) + std::log(d) + boost::math::digamma(p.alpha) -
                   boost::math::digamma(a_half) + lambda_reg * abs_r;
  out.grad.beta = -p.alpha / p.beta + a_half * 2.0 * (1.0 + p.nu) / d;
  return out;
}

struct BetaNllLoss {
  double loss = 0.0;
  double d_mu = 0.0;
  double d_sigma2 = 0.0;
};

/// stopgrad(sigma2^beta) * (0.5 log sigma2 + (y - mu)^2 / (2 sigma2)).
inline BetaNllLoss beta_nll(double y, double mu, double sigma2, double beta_exp) {
  if (!(sigma2 > 0.0)) throw NumericError("beta_nll needs sigma2 > 0");
  if (!(beta_exp >= 0.0 && beta_exp <= 1.0)) throw UsageError("beta exponent must lie in [0, 1]");
  const double c = std::pow(sigma2, beta_exp);
  const double r = y - mu;
  BetaNllLoss out;
  out.loss = c * (0.5 * std::log(sigma2) + r * r / (2.0 * sigma2));
  out.d_mu = -c * r / sigma2;
  out.d_sigma2 = c * (0.5 / sigma2 - r * r / (2.0 * sigma2 * sigma2));
  return out;
}

} // namespace equicalib
