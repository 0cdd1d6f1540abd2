#pragma once

// Binomial tails evaluated in log space, and the fusion-rule error
// polynomials built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rfusion/probability.hpp"

namespace rfusion {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Terms this far below the peak (in nats) are dropped. e^-64 ~ 1.6e-28,
// well under the double precision of any tail they would join.
inline constexpr long double kTermCutoff = 64.0L;

inline void require_sensors(int K) {
  if (K <= 0) throw std::domain_error("sensor count K must be positive, got " + std::to_string(K));
}

// log C(K, i) + i log p + (K - i) log q, with 0 * log 0 treated as 0.
inline long double log_pmf_term(int K, int i, long double log_fact_K, long double lp, long double lq) {
  long double t = log_fact_K - std::lgamma(static_cast<long double>(i) + 1.0L) -
                  std::lgamma(static_cast<long double>(K - i) + 1.0L);
  if (i > 0) t += i * lp;
  if (i < K) t += (K - i) * lq;
  return t;
}

}  // namespace detail

/// log P(X >= j) for X ~ Binomial(K, p), with p given in log form.
///
/// Summation starts at the largest term (the pmf mode, or j when the mode
/// lies below j) and walks outward until terms fall below the cutoff, so the
/// cost is O(sqrt(K)) and tails down to the double underflow limit keep full
/// relative precision.
inline double log_binom_tail_ge(int K, int j, const LogProb& p) {
  detail::require_sensors(K);
  if (j <= 0) return 0.0;
  if (j > K) return detail::kNegInf;
  if (p.log_p == detail::kNegInf) return detail::kNegInf;
  if (p.log_q == detail::kNegInf) return 0.0;

  const long double lp = p.log_p;
  const long double lq = p.log_q;
  const long double lfK = std::lgamma(static_cast<long double>(K) + 1.0L);
  const long double prob = std::exp(lp);
  int mode = static_cast<int>(std::floor((K + 1) * prob));
  mode = std::clamp(mode, 0, K);
  const int peak = std::max(j, mode);

  const long double top = detail::log_pmf_term(K, peak, lfK, lp, lq);
  long double sum = 1.0L;
  for (int i = peak + 1; i <= K; ++i) {
    const long double d = detail::log_pmf_term(K, i, lfK, lp, lq) - top;
    if (d < -detail::kTermCutoff) break;
    sum += std::exp(d);
  }
  for (int i = peak - 1; i >= j; --i) {
    const long double d = detail::log_pmf_term(K, i, lfK, lp, lq) - top;
    if (d < -detail::kTermCutoff) break;
    sum += std::exp(d);
  }
  const long double result = top + std::log(sum);
  return static_cast<double>(std::min(result, 0.0L));
}

/// log P(X <= k) for X ~ Binomial(K, p); evaluated directly as the upper
/// tail of K - X ~ Binomial(K, 1 - p).
inline double log_binom_cdf(int k, int K, const LogProb& p) {
  detail::require_sensors(K);
  return log_binom_tail_ge(K, K - k, p.complement());
}

/// log P(X == i) for X ~ Binomial(K, p).
inline double log_binom_pmf(int i, int K, const LogProb& p) {
  detail::require_sensors(K);
  if (i < 0 || i > K) return detail::kNegInf;
  if (i > 0 && p.log_p == detail::kNegInf) return detail::kNegInf;
  if (i < K && p.log_q == detail::kNegInf) return detail::kNegInf;
  const long double lfK = std::lgamma(static_cast<long double>(K) + 1.0L);
  return static_cast<double>(detail::log_pmf_term(K, i, lfK, p.log_p, p.log_q));
}

namespace detail {

inline constexpr double kLogHalf = -0.6931471805599453;

// A probability from the logs of it and of its complement, taken from
// whichever side is below 1/2.
inline double from_two_sided(double log_v, double log_c) {
  return log_v <= kLogHalf ? std::exp(log_v) : -std::expm1(log_c);
}

}  // namespace detail

/// P(X >= j) for X ~ Binomial(K, p).
inline double binom_tail_ge(int K, int j, double p) {
  require_probability(p, "p");
  const LogProb lp = LogProb::from_prob(p);
  const double log_v = log_binom_tail_ge(K, j, lp);
  if (log_v <= detail::kLogHalf) return std::exp(log_v);
  return detail::from_two_sided(log_v, log_binom_cdf(j - 1, K, lp));
}

/// P(X <= k) for X ~ Binomial(K, p). Computed from its own terms rather
/// than as 1 - tail, so small cdf values keep their relative precision.
inline double binom_cdf(int k, int K, double p) {
  require_probability(p, "p");
  const LogProb lp = LogProb::from_prob(p);
  const double log_v = log_binom_cdf(k, K, lp);
  if (log_v <= detail::kLogHalf) return std::exp(log_v);
  return detail::from_two_sided(log_v, log_binom_tail_ge(K, k + 1, lp));
}

inline double binom_pmf(int i, int K, double p) {
  require_probability(p, "p");
  return std::exp(log_binom_pmf(i, K, LogProb::from_prob(p)));
}

inline double log_add_exp(double a, double b) noexcept {
  if (a == detail::kNegInf) return b;
  if (b == detail::kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Counting fusion rule over K binary local decisions.
///
/// Declares H1 when more than `threshold` sensors alarm, H0 when fewer than
/// `threshold` alarm, and flips a coin with success probability `tie_prob`
/// when exactly `threshold` alarm.
struct FusionRule {
  int sensors = 1;
  int threshold = 0;
  double tie_prob = 0.0;

  /// Majority vote: strict majority for odd K, fair coin on the K/2 tie for even K.
  static FusionRule majority(int K) {
    detail::require_sensors(K);
    if (K % 2 == 1) return {K, (K - 1) / 2, 0.0};
    return {K, K / 2, 0.5};
  }

  /// Fusion-center counting rule: H1 iff more than k alarms, no randomization.
  static FusionRule counting(int K, int k) {
    FusionRule r{K, k, 0.0};
    r.validate();
    return r;
  }

  void validate() const {
    detail::require_sensors(sensors);
    if (threshold < 0 || threshold > sensors) {
      throw std::domain_error("threshold must lie in [0, K], got " + std::to_string(threshold));
    }
    require_probability(tie_prob, "tie_prob");
  }

  /// Tie probabilities other than 0 and 1/2 are admitted but unusual.
  bool has_standard_tie() const noexcept { return tie_prob == 0.0 || tie_prob == 0.5; }

  /// Decision for a given number of alarms and the outcome of the tie coin.
  int decide(int alarms, bool tie_coin) const noexcept {
    if (alarms > threshold) return 1;
    if (alarms < threshold) return 0;
    return tie_coin ? 1 : 0;
  }
};

/// log of the system false alarm probability of `rule` with local false alarm p_f.
inline double log_rule_false_alarm(const FusionRule& rule, const LogProb& p_f) {
  rule.validate();
  double out = log_binom_tail_ge(rule.sensors, rule.threshold + 1, p_f);
  if (rule.tie_prob > 0.0) {
    out = log_add_exp(out, std::log(rule.tie_prob) + log_binom_pmf(rule.threshold, rule.sensors, p_f));
  }
  return out;
}

/// log of the system miss probability of `rule` with local miss p_m.
/// Alarms under H1 are Binomial(K, 1 - p_m).
inline double log_rule_miss(const FusionRule& rule, const LogProb& p_m) {
  rule.validate();
  const LogProb detect = p_m.complement();
  double out = log_binom_cdf(rule.threshold - 1, rule.sensors, detect);
  if (rule.tie_prob < 1.0) {
    out = log_add_exp(out, std::log1p(-rule.tie_prob) + log_binom_pmf(rule.threshold, rule.sensors, detect));
  }
  return out;
}

inline double rule_false_alarm(const FusionRule& rule, double p_f) {
  return std::exp(log_rule_false_alarm(rule, LogProb::from_prob(p_f)));
}

inline double rule_miss(const FusionRule& rule, double p_m) {
  return std::exp(log_rule_miss(rule, LogProb::from_prob(p_m)));
}

/// log of the majority-vote system false alarm probability.
inline double log_consensus_pf(int K, const LogProb& p_f) {
  return log_rule_false_alarm(FusionRule::majority(K), p_f);
}

/// System false alarm probability of majority voting over K identical
/// sensors with local false alarm p_f (fair coin on ties for even K).
///
/// The same polynomial gives the system miss probability when evaluated at
/// the local miss probability.
inline double consensus_pf(int K, double p_f) {
  require_probability(p_f, "p_f");
  return std::exp(log_consensus_pf(K, LogProb::from_prob(p_f)));
}

/// Error probability of a majority-vote network of K (odd) sensors whose
/// local false alarm and miss probabilities both equal theta.
inline double consensus_error(int K, double theta) {
  detail::require_sensors(K);
  if (K % 2 == 0) {
    throw std::invalid_argument("consensus_error needs an odd sensor count; use consensus_pf for even K");
  }
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw std::domain_error("theta must lie in [0, 1/2], got " + std::to_string(theta));
  }
  return consensus_pf(K, theta);
}

}  // namespace rfusion
