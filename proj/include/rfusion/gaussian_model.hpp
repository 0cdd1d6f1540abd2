#pragma once

// Unit-variance Gaussian location shift: H0 ~ N(0, 1), H1 ~ N(mu, 1).
// A threshold test on y at mu/2 has equal false alarm and miss, which makes
// this family a constructive instance for any target theta in (0, 1/2).

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "rfusion/probability.hpp"

namespace rfusion {

/// Standard normal CDF.
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal upper tail 1 - Phi(x), accurate for large x.
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of normal_cdf on (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile needs p in (0, 1), got " + std::to_string(p));
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

struct GaussianShiftModel {
  double mu = 0.0;             ///< mean shift under H1
  double theta = 0.5;          ///< P_F = P_M of the threshold test at mu / 2
  double lrt_threshold = 0.0;  ///< mu / 2, in observation space

  static GaussianShiftModel from_mu(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::domain_error("mu must be finite and >= 0");
    return {mu, normal_sf(mu / 2.0), mu / 2.0};
  }

  double density(int hypothesis, double y) const noexcept {
    return normal_pdf(hypothesis == 0 ? y : y - mu);
  }

  /// log p1(y) / p0(y).
  double log_likelihood_ratio(double y) const noexcept { return mu * y - 0.5 * mu * mu; }

  /// Observation-space threshold at which the likelihood ratio equals e^log_t.
  double threshold_for_log_lr(double log_t) const {
    if (mu <= 0.0) throw std::domain_error("likelihood ratio is constant when mu == 0");
    return log_t / mu + 0.5 * mu;
  }

  /// Operating point of the test that declares H1 when y > tau.
  OperatingPoint operating_point(double tau) const noexcept { return {normal_sf(tau), normal_cdf(tau - mu)}; }

  /// Threshold tau giving local miss probability p_m.
  double threshold_for_miss(double p_m) const { return mu + normal_quantile(p_m); }

  /// Threshold tau giving local false alarm probability p_f.
  double threshold_for_false_alarm(double p_f) const { return -normal_quantile(p_f); }
};

/// Gaussian shift whose minimax threshold test has P_F = P_M = theta.
inline GaussianShiftModel model_from_theta(double theta) {
  if (!(theta > 0.0 && theta < 0.5)) {
    throw std::domain_error("theta must lie in (0, 1/2), got " + std::to_string(theta));
  }
  return GaussianShiftModel::from_mu(-2.0 * normal_quantile(theta));
}

}  // namespace rfusion
