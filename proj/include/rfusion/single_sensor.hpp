#pragma once

// Loss of the minimax (P_F = P_M = theta) rule against the unconstrained
// minimum-error rule, for one sensor and for majority-vote networks.
//
// Every ROC curve whose minimax point is (theta, theta) lies inside the
// "butterfly": two triangles meeting at (theta, theta), bounded by
//   l1: p_m = theta_hat * (1 - p_f)
//   l2: p_f = theta_hat * (1 - p_m)        theta_hat = theta / (1 - theta)
// and by the chords to the corners (0, 1) and (1, 0).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "rfusion/binomial.hpp"
#include "rfusion/probability.hpp"
#include "rfusion/scalar_search.hpp"

namespace rfusion {

class ButterflyRegion {
 public:
  explicit ButterflyRegion(double theta) : theta_(theta) {
    if (!(theta > 0.0 && theta < 0.5)) {
      throw std::domain_error("butterfly theta must lie in (0, 1/2), got " + std::to_string(theta));
    }
    theta_hat_ = theta / (1.0 - theta);
  }

  double theta() const noexcept { return theta_; }
  double theta_hat() const noexcept { return theta_hat_; }

 private:
  double theta_;
  double theta_hat_;
};

struct LossReport {
  double loss = 0.0;               ///< robust_error - optimum_error
  OperatingPoint optimum_point{};  ///< local point of the error-minimizing rule
  double robust_error = 0.0;       ///< average error with every sensor at (theta, theta)
  double optimum_error = 0.0;      ///< average error with every sensor at optimum_point
};

/// Miss probability on l1 at false alarm p_f.
inline double line_l1(const ButterflyRegion& region, double p_f) {
  require_probability(p_f, "p_f");
  return region.theta_hat() * (1.0 - p_f);
}

/// Miss probability on l2 at false alarm p_f; l2 is l1 with the axes
/// swapped, so it is only defined for p_f in [0, theta_hat].
inline double line_l2(const ButterflyRegion& region, double p_f) {
  if (!(p_f >= 0.0 && p_f <= region.theta_hat())) {
    throw std::domain_error("line_l2 is defined for p_f in [0, theta_hat]");
  }
  return 1.0 - p_f / region.theta_hat();
}

/// Membership in the closed butterfly region, with a 1e-12 boundary slack.
inline bool butterfly_contains(const ButterflyRegion& region, const OperatingPoint& pt) {
  if (!is_probability(pt.p_f) || !is_probability(pt.p_m)) return false;
  constexpr double eps = 1e-12;
  const double t = region.theta();
  const double th = region.theta_hat();
  // Left wing: p_f <= theta, between l1 (below) and l2 (above).
  auto left_wing = [&](double a, double b) {
    return a <= t + eps && b >= th * (1.0 - a) - eps && b <= 1.0 - a / th + eps;
  };
  // The right wing is the left wing with the axes swapped.
  return left_wing(pt.p_f, pt.p_m) || left_wing(pt.p_m, pt.p_f);
}

/// Largest single-sensor loss over all models whose minimax point is
/// (theta, theta): theta(1 - 2 theta) / (2 (1 - theta)).
inline double sup_single_loss(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw std::domain_error("theta must lie in [0, 1/2], got " + std::to_string(theta));
  }
  return 0.5 * theta * (1.0 - 2.0 * theta) / (1.0 - theta);
}

struct SingleLossMaximum {
  double theta_star = 0.0;
  double loss_star = 0.0;
};

/// Maximizes sup_single_loss over [0, 1/2] numerically.
inline SingleLossMaximum max_single_loss() {
  const ScalarOptimum opt = grid_golden_max([](double t) { return sup_single_loss(t); }, 0.0, 0.5);
  return {opt.x, opt.value};
}

/// Area of the butterfly region.
inline double butterfly_area(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw std::domain_error("theta must lie in [0, 1/2], got " + std::to_string(theta));
  }
  return theta * (1.0 - 2.0 * theta) / (1.0 - theta);
}

/// P(loss == 0) when the operating point is uniform on the butterfly.
inline double prob_zero_loss(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw std::domain_error("theta must lie in [0, 1/2], got " + std::to_string(theta));
  }
  return 1.0 - theta;
}

struct ZeroLossMassEstimate {
  std::uint64_t samples = 0;
  std::uint64_t in_region = 0;      ///< hits inside the butterfly
  std::uint64_t in_shaded = 0;      ///< hits with (p_f + p_m) / 2 < theta
  double area = 0.0;
  double area_stderr = 0.0;
  double zero_loss_mass = 0.0;      ///< (region - shaded) / region
  double zero_loss_stderr = 0.0;
};

/// Rejection-sampling estimate of the butterfly area and of the zero-loss
/// mass, from uniform draws on the unit square.
inline ZeroLossMassEstimate estimate_zero_loss_mass(double theta, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("estimate_zero_loss_mass needs at least one sample");
  const ButterflyRegion region(theta);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ZeroLossMassEstimate est;
  est.samples = samples;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const OperatingPoint pt{unit(gen), unit(gen)};
    if (!butterfly_contains(region, pt)) continue;
    ++est.in_region;
    if (0.5 * (pt.p_f + pt.p_m) < theta) ++est.in_shaded;
  }
  const double n = static_cast<double>(samples);
  est.area = static_cast<double>(est.in_region) / n;
  est.area_stderr = std::sqrt(est.area * (1.0 - est.area) / n);
  if (est.in_region > 0) {
    const double m = static_cast<double>(est.in_region);
    est.zero_loss_mass = static_cast<double>(est.in_region - est.in_shaded) / m;
    est.zero_loss_stderr = std::sqrt(est.zero_loss_mass * (1.0 - est.zero_loss_mass) / m);
  }
  return est;
}

namespace detail {

inline void require_odd_network(int K, double theta) {
  require_sensors(K);
  if (K % 2 == 0) throw std::invalid_argument("sensor count must be odd, got " + std::to_string(K));
  if (!(theta > 0.0 && theta < 0.5)) {
    throw std::domain_error("theta must lie in (0, 1/2), got " + std::to_string(theta));
  }
}

}  // namespace detail

/// Multi-sensor loss with the optimum rule placed on l1 at
/// (theta / x, theta (x - theta) / (x (1 - theta))). x = +inf selects the l1
/// endpoint (0, theta_hat) exactly.
inline LossReport multi_loss_report(int K, double theta, double x) {
  detail::require_odd_network(K, theta);
  if (!(x >= 1.0)) throw std::domain_error("x must be >= 1, got " + std::to_string(x));
  const double theta_hat = theta / (1.0 - theta);
  OperatingPoint opt;
  if (std::isinf(x)) {
    opt = {0.0, theta_hat};
  } else if (x == 1.0) {
    opt = {theta, theta};
  } else {
    opt = {theta / x, theta * (x - theta) / (x * (1.0 - theta))};
  }
  LossReport r;
  r.optimum_point = opt;
  r.robust_error = consensus_pf(K, theta);
  r.optimum_error = 0.5 * (consensus_pf(K, opt.p_f) + consensus_pf(K, opt.p_m));
  r.loss = r.robust_error - r.optimum_error;
  return r;
}

inline double multi_loss(int K, double theta, double x) { return multi_loss_report(K, theta, x).loss; }

/// Multi-sensor loss with every sensor at the l1 endpoint (0, theta_hat).
inline double multi_loss_inf(int K, double theta) {
  detail::require_odd_network(K, theta);
  const double theta_hat = theta / (1.0 - theta);
  return consensus_pf(K, theta) - 0.5 * consensus_pf(K, theta_hat);
}

struct MultiLossExtremum {
  double x = 1.0;  ///< may be +inf
  double loss = 0.0;
};

inline constexpr double kMaxFiniteShift = 1e6;

namespace detail {

template <typename Better>
MultiLossExtremum extremize_multi_loss(int K, double theta, double sign, Better better) {
  require_odd_network(K, theta);
  // Searched in u = log x on [0, log X_MAX]; the x = inf endpoint is scored separately.
  const auto objective = [&](double u) { return sign * multi_loss(K, theta, std::exp(u)); };
  const ScalarOptimum opt = grid_golden_max(objective, 0.0, std::log(kMaxFiniteShift));
  MultiLossExtremum best{std::exp(opt.x), sign * opt.value};
  if (opt.x == 0.0) best.x = 1.0;
  const double at_inf = multi_loss_inf(K, theta);
  if (better(at_inf, best.loss)) best = {std::numeric_limits<double>::infinity(), at_inf};
  return best;
}

}  // namespace detail

/// Largest multi-sensor loss over x in [1, inf]. Never negative, since x = 1
/// gives zero.
inline MultiLossExtremum optimize_multi_loss_x(int K, double theta) {
  MultiLossExtremum best = detail::extremize_multi_loss(K, theta, 1.0, [](double a, double b) { return a > b; });
  if (best.loss < 0.0) best = {1.0, 0.0};
  return best;
}

/// Smallest multi-sensor loss over x in [1, inf].
inline MultiLossExtremum minimize_multi_loss_x(int K, double theta) {
  MultiLossExtremum best = detail::extremize_multi_loss(K, theta, -1.0, [](double a, double b) { return a < b; });
  if (best.loss > 0.0) best = {1.0, 0.0};
  return best;
}

}  // namespace rfusion
