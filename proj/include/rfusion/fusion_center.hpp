#pragma once

// Counting rules at a fusion center, the map h^K_k that pairs each local
// false alarm with the local miss making the fused test balanced
// (P_F at the output == P_M at the output), and the largest gain a fusion
// center can offer over majority voting when both designs are minimax.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfusion/binomial.hpp"
#include "rfusion/probability.hpp"
#include "rfusion/scalar_search.hpp"
#include "rfusion/single_sensor.hpp"

namespace rfusion {

namespace detail {

inline void require_threshold(int K, int k) {
  require_sensors(K);
  if (k < 0 || k > K) {
    throw std::domain_error("threshold k must lie in [0, K], got " + std::to_string(k));
  }
}

// Logit range searched by the root finders; e^-2000 is far below anything a
// double can hold, while the log-space kernels stay finite there.
inline constexpr double kLogitBound = 2000.0;

// Each fused error probability is carried with its complement so that the
// comparison below is made on whichever side is small.
struct TwoSided {
  double log_v;
  double log_c;
};

inline TwoSided fused_false_alarm(const LogProb& p_f, int K, int k) {
  return {log_binom_tail_ge(K, k + 1, p_f), log_binom_cdf(k, K, p_f)};
}

inline TwoSided fused_miss(const LogProb& p_m, int K, int k) {
  const LogProb detect = p_m.complement();
  return {log_binom_cdf(k, K, detect), log_binom_tail_ge(K, k + 1, detect)};
}

// log-odds of a two-sided probability.
inline double log_odds(const TwoSided& a) { return a.log_v - a.log_c; }

// Sign of a - b for probabilities a, b given as two-sided logs.
inline int compare(const TwoSided& a, const TwoSided& b) {
  constexpr double log_half = -0.6931471805599453;
  const bool a_small = a.log_v <= log_half;
  const bool b_small = b.log_v <= log_half;
  if (a_small && b_small) return a.log_v < b.log_v ? -1 : (a.log_v > b.log_v ? 1 : 0);
  if (!a_small && !b_small) return a.log_c > b.log_c ? -1 : (a.log_c < b.log_c ? 1 : 0);
  return a_small ? -1 : 1;
}

}  // namespace detail

/// log of the fused false alarm probability 1 - B(k; K, p_f).
inline double log_pf_fusion(const LogProb& p_f, int K, int k) {
  detail::require_threshold(K, k);
  return log_binom_tail_ge(K, k + 1, p_f);
}

/// log of the fused miss probability B(k; K, 1 - p_m).
inline double log_pm_fusion(const LogProb& p_m, int K, int k) {
  detail::require_threshold(K, k);
  return log_binom_cdf(k, K, p_m.complement());
}

/// False alarm at the fusion center for the rule "H1 iff more than k alarms".
inline double pf_fusion(double p_f, int K, int k) {
  require_probability(p_f, "p_f");
  detail::require_threshold(K, k);
  const detail::TwoSided t = detail::fused_false_alarm(LogProb::from_prob(p_f), K, k);
  return detail::from_two_sided(t.log_v, t.log_c);
}

/// Miss at the fusion center for the rule "H1 iff more than k alarms".
inline double pm_fusion(double p_m, int K, int k) {
  require_probability(p_m, "p_m");
  detail::require_threshold(K, k);
  const detail::TwoSided t = detail::fused_miss(LogProb::from_prob(p_m), K, k);
  return detail::from_two_sided(t.log_v, t.log_c);
}

struct FusionMapQuery {
  int K = 1;
  int k = 0;
  double p_f = 0.0;
};

/// h^K_k in log-odds coordinates: maps logit(p_f) to the logit of the local
/// miss probability that balances the fused error probabilities.
///
/// Only thresholds k < K admit such a pair (at k == K the rule never fires).
inline double h_map_logit(int K, int k, double logit_pf) {
  detail::require_threshold(K, k);
  if (k == K) throw std::domain_error("h_map is undefined for k == K: the rule never declares H1");
  if (logit_pf == std::numeric_limits<double>::infinity()) return logit_pf;
  if (logit_pf == -std::numeric_limits<double>::infinity()) return logit_pf;
  const detail::TwoSided target = detail::fused_false_alarm(LogProb::from_logit(logit_pf), K, k);
  const double target_odds = detail::log_odds(target);
  const auto residual = [&](double z) {
    return detail::log_odds(detail::fused_miss(LogProb::from_logit(z), K, k)) - target_odds;
  };
  // Bracket width 4e-13 in log-odds keeps the probability bracket under 1e-13.
  const auto [lo, hi] = root_increasing(residual, -detail::kLogitBound, detail::kLogitBound, 4e-13);
  return lo + 0.5 * (hi - lo);
}

/// h^K_k(p_f): the local miss probability paired with p_f.
inline double h_map(const FusionMapQuery& q) {
  detail::require_threshold(q.K, q.k);
  require_probability(q.p_f, "p_f");
  if (q.k == q.K) throw std::domain_error("h_map is undefined for k == K: the rule never declares H1");
  if (q.p_f == 0.0) return 0.0;
  if (q.p_f == 1.0) return 1.0;
  return logistic(h_map_logit(q.K, q.k, logit(q.p_f)));
}

/// Threshold whose map is the functional inverse of h^K_k.
inline int inverse_threshold(int K, int k) { return K - 1 - k; }

struct LineIntersection {
  double x_m = 0.0;        ///< 1 - p_f at the intersection
  OperatingPoint point{};  ///< the local operating point
  double error = 0.0;      ///< fused error probability there (P_F == P_M at the output)
  bool at_apex = false;    ///< no crossing inside the open segment; point is (theta, theta)
};

/// Intersection of h^K_k with l1* = {(p_f, theta_hat (1 - p_f)) : p_f < theta}.
inline LineIntersection intersect_l1(int K, int k, double theta) {
  detail::require_threshold(K, k);
  if (k > K / 2) throw std::domain_error("intersect_l1 needs k <= floor(K/2)");
  const ButterflyRegion region(theta);
  const double log_th = std::log(region.theta_hat());

  const auto miss_on_l1 = [&](const LogProb& pf) { return LogProb::from_log(log_th + pf.log_q); };
  // Increasing in p_f: fused false alarm rises while the l1 miss falls.
  const auto residual = [&](double z) {
    const LogProb pf = LogProb::from_logit(z);
    return detail::log_odds(detail::fused_false_alarm(pf, K, k)) -
           detail::log_odds(detail::fused_miss(miss_on_l1(pf), K, k));
  };

  // On l1 the apex is exactly (theta, theta).
  const LogProb apex = LogProb::from_prob(theta);
  LineIntersection out;
  if (detail::compare(detail::fused_false_alarm(apex, K, k), detail::fused_miss(apex, K, k)) <= 0) {
    out.at_apex = true;
    out.point = {theta, theta};
    out.x_m = 1.0 - theta;
    out.error = std::exp(log_pf_fusion(apex, K, k));
    return out;
  }
  const auto [lo, hi] = root_increasing(residual, -detail::kLogitBound, apex.logit(), 4e-13);
  const LogProb pf = LogProb::from_logit(lo + 0.5 * (hi - lo));
  const LogProb pm = miss_on_l1(pf);
  out.point = {pf.prob(), pm.prob()};
  out.x_m = std::exp(pf.log_q);
  out.error = std::exp(log_pm_fusion(pm, K, k));
  return out;
}

/// Intersection of h^K_k with l2* = {(theta_hat (1 - p_m), p_m) : p_m < theta};
/// the mirror image of intersect_l1, for k >= floor(K/2).
inline LineIntersection intersect_l2(int K, int k, double theta) {
  detail::require_threshold(K, k);
  if (k < K / 2 || k == K) throw std::domain_error("intersect_l2 needs floor(K/2) <= k < K");
  const ButterflyRegion region(theta);
  const double log_th = std::log(region.theta_hat());

  const auto fa_on_l2 = [&](const LogProb& pm) { return LogProb::from_log(log_th + pm.log_q); };
  const auto residual = [&](double z) {
    const LogProb pm = LogProb::from_logit(z);
    return detail::log_odds(detail::fused_miss(pm, K, k)) -
           detail::log_odds(detail::fused_false_alarm(fa_on_l2(pm), K, k));
  };

  const LogProb apex = LogProb::from_prob(theta);
  LineIntersection out;
  if (detail::compare(detail::fused_miss(apex, K, k), detail::fused_false_alarm(apex, K, k)) <= 0) {
    out.at_apex = true;
    out.point = {theta, theta};
    out.x_m = 1.0 - theta;
    out.error = std::exp(log_pm_fusion(apex, K, k));
    return out;
  }
  const auto [lo, hi] = root_increasing(residual, -detail::kLogitBound, apex.logit(), 4e-13);
  const LogProb pm = LogProb::from_logit(lo + 0.5 * (hi - lo));
  const LogProb pf = fa_on_l2(pm);
  out.point = {pf.prob(), pm.prob()};
  out.x_m = std::exp(pm.log_q);
  out.error = std::exp(log_pf_fusion(pf, K, k));
  return out;
}

/// Sum 1 + sum_{i=1..k} C(K, i) r^i, the common shape of the two
/// polynomials in the l1 intersection condition.
inline double intersection_poly(int K, int k, double ratio) {
  double sum = 1.0;
  double binom = 1.0;
  double power = 1.0;
  for (int i = 1; i <= k; ++i) {
    binom *= static_cast<double>(K - i + 1) / static_cast<double>(i);
    power *= ratio;
    sum += binom * power;
  }
  return sum;
}

/// f1 at x on l1: ratio (1 - x theta_hat) / (x theta_hat).
inline double intersection_f1(int K, int k, double x, double theta_hat) {
  return intersection_poly(K, k, (1.0 - x * theta_hat) / (x * theta_hat));
}

/// f2 at x on l1: ratio (1 - x) / x.
inline double intersection_f2(int K, int k, double x) { return intersection_poly(K, k, (1.0 - x) / x); }

/// Fused error of the k = 0 (any-alarm) rule at its l1 intersection:
/// theta_hat^K / (1 + theta_hat^K).
inline double wf_optimum_error(int K, double theta) {
  detail::require_sensors(K);
  const ButterflyRegion region(theta);
  return logistic(static_cast<double>(K) * std::log(region.theta_hat()));
}

/// Excess error of threshold k >= 1 over k = 0, both on l1*.
inline double error_gap(int K, int k, double theta) {
  if (k < 1) throw std::domain_error("error_gap needs k >= 1");
  const LineIntersection at = intersect_l1(K, k, theta);
  return at.error - wf_optimum_error(K, theta);
}

/// The same gap evaluated through f1 and f2 at the intersection.
inline double error_gap_closed_form(int K, int k, double theta) {
  if (k < 1) throw std::domain_error("error_gap needs k >= 1");
  const LineIntersection at = intersect_l1(K, k, theta);
  const double th = theta / (1.0 - theta);
  const double thK = std::pow(th, K);
  const double f1 = intersection_f1(K, k, at.x_m, th);
  const double f2 = intersection_f2(K, k, at.x_m);
  return thK / (1.0 + thK) * ((thK * f1 + f1) / (thK * f1 + f2) - 1.0);
}

struct ThresholdScanEntry {
  int k = 0;
  LineIntersection at{};
  bool on_l2 = false;
};

/// Every counting threshold k in [0, K-1] with its best balanced point on
/// l1* (k <= floor(K/2)) or l2* (k > floor(K/2)).
inline std::vector<ThresholdScanEntry> scan_fusion_thresholds(int K, double theta) {
  detail::require_odd_network(K, theta);
  std::vector<ThresholdScanEntry> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    if (k <= K / 2) {
      out.push_back({k, intersect_l1(K, k, theta), false});
    } else {
      out.push_back({k, intersect_l2(K, k, theta), true});
    }
  }
  return out;
}

struct WfLossReport {
  double theta = 0.0;
  int K = 1;
  double wof_error = 0.0;      ///< majority vote with every sensor at (theta, theta)
  double wf_error = 0.0;       ///< best balanced fusion-center design
  double loss = 0.0;           ///< wof_error - wf_error
  int best_k = 0;              ///< 0, mirrored by K - 1 on l2*
  OperatingPoint best_point{};
  bool brute_force_checked = false;
  bool brute_force_agrees = false;
  int brute_force_k = 0;       ///< lowest argmin of the threshold scan
  double brute_force_error = 0.0;
};

/// Largest scan size for which max_wf_loss cross-checks by brute force.
inline constexpr int kBruteForceMaxSensors = 25;

/// Largest loss from running without a fusion center, for odd K.
inline WfLossReport max_wf_loss(int K, double theta) {
  detail::require_odd_network(K, theta);
  WfLossReport r;
  r.theta = theta;
  r.K = K;
  r.wof_error = consensus_error(K, theta);
  r.wf_error = wf_optimum_error(K, theta);
  r.loss = r.wof_error - r.wf_error;
  r.best_k = 0;
  r.best_point = intersect_l1(K, 0, theta).point;
  if (K <= kBruteForceMaxSensors) {
    const auto scan = scan_fusion_thresholds(K, theta);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
      if (scan[i].at.error < scan[best].at.error) best = i;
    }
    r.brute_force_checked = true;
    r.brute_force_k = scan[best].k;
    r.brute_force_error = scan[best].at.error;
    r.brute_force_agrees = std::abs(r.brute_force_error - r.wf_error) <= 1e-10 &&
                           (r.brute_force_k == 0 || r.brute_force_k == K - 1);
  }
  return r;
}

/// max_wf_loss as a plain function of theta on (0, 1/2]; zero at 1/2.
inline double wf_loss_value(int K, double theta) {
  if (theta >= 0.5) return 0.0;
  return consensus_pf(K, theta) - wf_optimum_error(K, theta);
}

struct WfLossSupremum {
  double theta_star = 0.0;
  double loss_star = 0.0;
};

/// Maximizes the fusion-center gain over theta for odd K.
inline WfLossSupremum sup_wf_loss(int K) {
  detail::require_sensors(K);
  if (K % 2 == 0) throw std::invalid_argument("sensor count must be odd, got " + std::to_string(K));
  const ScalarOptimum opt = grid_golden_max([K](double t) { return wf_loss_value(K, t); }, 1e-9, 0.5);
  return {opt.x, opt.value};
}

struct NonidenticalCheck {
  bool condition_holds = false;
  double product_error = 0.0;  ///< fused miss: every sensor misses
  double false_alarm = 0.0;    ///< fused false alarm: some sensor alarms
};

/// k = 0 fusion of sensors with differing operating points, all on l1.
inline NonidenticalCheck nonidentical_product_check(const std::vector<OperatingPoint>& points, double theta) {
  if (points.empty()) throw std::domain_error("nonidentical_product_check needs at least one point");
  const ButterflyRegion region(theta);
  double log_miss = 0.0;
  double log_pass = 0.0;
  for (const auto& pt : points) {
    require_valid(pt);
    if (std::abs(pt.p_m - line_l1(region, pt.p_f)) > 1e-10) {
      throw std::domain_error("operating point is not on l1");
    }
    log_miss += std::log(pt.p_m);
    log_pass += std::log1p(-pt.p_f);
  }
  NonidenticalCheck out;
  out.product_error = std::exp(log_miss);
  out.false_alarm = -std::expm1(log_pass);
  out.condition_holds = std::abs(out.product_error + std::exp(log_pass) - 1.0) <= 1e-10;
  return out;
}

/// Smallest fusion-center network whose minimax error matches a majority
/// vote network of K2 sensors at the same theta.
inline int equivalent_sensor_count(int K2, double theta) {
  detail::require_odd_network(K2, theta);
  const double wof = consensus_error(K2, theta);
  if (!(wof < 0.5)) throw std::domain_error("majority-vote error must be below 1/2");
  const double log_odds = std::log(wof) - std::log1p(-wof);
  const double log_th = std::log(theta / (1.0 - theta));
  // Ratios within rounding of an integer are taken as that integer.
  const double ratio = log_odds / log_th;
  return static_cast<int>(std::ceil(ratio - 1e-9));
}

struct ThetaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Range of grid thetas in (0, 1/2) for which equivalent_sensor_count(K2, .) == K1.
inline std::optional<ThetaInterval> theta_interval_for_count(int K2, int K1, double step = 1e-4) {
  std::optional<ThetaInterval> out;
  for (double t = step; t < 0.5; t += step) {
    if (equivalent_sensor_count(K2, t) != K1) continue;
    if (!out) out = ThetaInterval{t, t};
    out->hi = t;
  }
  return out;
}

}  // namespace rfusion
