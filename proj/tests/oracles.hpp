#pragma once

// Reference implementations that share no code with the library: plain
// enumeration and direct sums in long double.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline long double choose(int n, int r) {
  if (r < 0 || r > n) return 0.0L;
  long double c = 1.0L;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

inline long double pmf(int K, int i, long double p) {
  return choose(K, i) * std::pow(p, i) * std::pow(1.0L - p, K - i);
}

/// P(X >= j) by summing the pmf.
inline double tail_ge(int K, int j, double p) {
  long double s = 0.0L;
  for (int i = std::max(j, 0); i <= K; ++i) s += pmf(K, i, p);
  return static_cast<double>(s);
}

inline double cdf(int k, int K, double p) {
  long double s = 0.0L;
  for (int i = 0; i <= std::min(k, K); ++i) s += pmf(K, i, p);
  return static_cast<double>(s);
}

/// Visits every one of the 2^K local decision patterns with its probability.
inline void for_each_pattern(int K, double p_alarm, const std::function<void(const std::vector<int>&, long double)>& f) {
  std::vector<int> bits(static_cast<std::size_t>(K));
  for (unsigned long m = 0; m < (1UL << K); ++m) {
    long double w = 1.0L;
    for (int i = 0; i < K; ++i) {
      bits[i] = static_cast<int>((m >> i) & 1UL);
      w *= bits[i] ? p_alarm : 1.0L - p_alarm;
    }
    f(bits, w);
  }
}

/// Majority vote false alarm by enumeration, fair coin on an exact tie.
inline double majority_false_alarm(int K, double p_f) {
  long double s = 0.0L;
  for_each_pattern(K, p_f, [&](const std::vector<int>& bits, long double w) {
    int alarms = 0;
    for (int b : bits) alarms += b;
    if (2 * alarms > K) s += w;
    if (2 * alarms == K) s += 0.5L * w;
  });
  return static_cast<double>(s);
}

/// Plain-probability bisection for the p_m balancing a fused false alarm.
inline double h_map(int K, int k, double p_f) {
  const double target = 1.0 - cdf(k, K, p_f);
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(k, K, 1.0 - mid) > target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
