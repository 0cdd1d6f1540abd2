#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rfusion {

/// A (false alarm, miss) pair on the ROC plane.
struct OperatingPoint {
  double p_f = 0.0;
  double p_m = 0.0;

  friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

inline bool is_probability(double p) noexcept { return p >= 0.0 && p <= 1.0; }

inline void require_probability(double p, const char* what) {
  if (!is_probability(p)) {
    throw std::domain_error(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

inline void require_valid(const OperatingPoint& pt) {
  require_probability(pt.p_f, "p_f");
  require_probability(pt.p_m, "p_m");
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// A probability carried as the pair (log p, log(1 - p)).
///
/// Both logs are kept so that values within an ulp of 0 or 1 still carry
/// their full relative precision. Binomial kernels and root finders work on
/// this representation; plain doubles are produced only at the boundary.
struct LogProb {
  double log_p = 0.0;    ///< log p, -inf when p == 0
  double log_q = 0.0;    ///< log(1 - p), -inf when p == 1

  static LogProb from_prob(double p) {
    require_probability(p, "probability");
    return {std::log(p), std::log1p(-p)};
  }

  /// Build from the log-odds z = log(p / (1 - p)); z may be +-inf.
  static LogProb from_logit(double z) noexcept {
    if (z == std::numeric_limits<double>::infinity()) return {0.0, -std::numeric_limits<double>::infinity()};
    if (z == -std::numeric_limits<double>::infinity()) return {-std::numeric_limits<double>::infinity(), 0.0};
    return {-softplus(-z), -softplus(z)};
  }

  /// Build from log p alone (log p <= 0).
  static LogProb from_log(double log_p) noexcept {
    const double q = -std::expm1(log_p);
    // log(1 - e^a): use log(-expm1(a)) near 0 and log1p(-e^a) further out.
    const double log_q = log_p > -0.693147180559945 ? std::log(q) : std::log1p(-std::exp(log_p));
    return {log_p, log_q};
  }

  LogProb complement() const noexcept { return {log_q, log_p}; }
  double prob() const noexcept { return std::exp(log_p); }
  double logit() const noexcept { return log_p - log_q; }
};

inline double logit(double p) {
  require_probability(p, "probability");
  return std::log(p) - std::log1p(-p);
}

inline double logistic(double z) noexcept { return LogProb::from_logit(z).prob(); }

}  // namespace rfusion
