#pragma once

// Numerical checks of the structural claims of the library, grouped into
// named suites. Each claim records the grid it ran on and its tolerance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rfusion/binomial.hpp"
#include "rfusion/fusion_center.hpp"
#include "rfusion/gaussian_model.hpp"
#include "rfusion/pbpo.hpp"
#include "rfusion/single_sensor.hpp"

namespace rfusion::verify {

struct ClaimResult {
  std::string claim;
  std::string grid;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;  ///< first counterexample, if any
};

namespace detail {

inline std::vector<double> unit_grid(int steps) {
  std::vector<double> g;
  for (int i = 1; i < steps; ++i) g.push_back(static_cast<double>(i) / steps);
  return g;
}

class Failure {
 public:
  template <typename... Args>
  void note(Args&&... args) {
    if (!first_.empty()) return;
    std::ostringstream os;
    os.precision(12);
    (os << ... << args);
    first_ = os.str();
  }
  bool ok() const { return first_.empty(); }
  const std::string& text() const { return first_; }

 private:
  std::string first_;
};

inline ClaimResult finish(std::string claim, std::string grid, double tol, const Failure& f) {
  return {std::move(claim), std::move(grid), tol, f.ok(), f.text()};
}

}  // namespace detail

/// Majority vote with a fair tie coin does not improve from 2K-1 to 2K sensors.
inline ClaimResult odd_even_equality(int max_half = 50, double tol = 1e-12) {
  detail::Failure f;
  for (int K = 1; K <= max_half; ++K) {
    for (double p : detail::unit_grid(100)) {
      const double a = consensus_pf(2 * K - 1, p);
      const double b = consensus_pf(2 * K, p);
      if (std::abs(a - b) > tol) f.note("K=", K, " p=", p, " |diff|=", std::abs(a - b));
    }
  }
  return detail::finish("odd_even_equality", "K in [1," + std::to_string(max_half) + "], p = 0.01..0.99", tol, f);
}

/// B(K/2; K, p) + B(K/2; K, 1 - p) = 1 with the fair tie coin at even K.
inline ClaimResult consensus_complementarity(int max_k = 200, double tol = 1e-12) {
  detail::Failure f;
  for (int K = 1; K <= max_k; ++K) {
    for (double p : detail::unit_grid(100)) {
      // Lower side with half the tie mass, summed directly.
      const auto lower = [K](double q) {
        const LogProb lp = LogProb::from_prob(q);
        if (K % 2 == 1) return std::exp(log_binom_cdf((K - 1) / 2, K, lp));
        return std::exp(log_binom_cdf(K / 2 - 1, K, lp)) + 0.5 * std::exp(log_binom_pmf(K / 2, K, lp));
      };
      const double s = lower(p) + lower(1.0 - p);
      if (std::abs(s - 1.0) > tol) f.note("K=", K, " p=", p, " sum=", s);
    }
  }
  return detail::finish("consensus_complementarity", "K in [1," + std::to_string(max_k) + "], p = 0.01..0.99", tol, f);
}

/// Identical sensors under majority vote: balanced output iff balanced input.
inline ClaimResult robust_iff_balanced(double tol = 1e-12) {
  detail::Failure f;
  const auto grid = detail::unit_grid(100);
  for (int K : {1, 3, 5, 7, 9}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const Prop1Check c = check_prop1(K, {grid[i], grid[j]});
        if (c.robust != (i == j)) f.note("K=", K, " local=(", grid[i], ",", grid[j], ")");
      }
    }
  }
  return detail::finish("robust_iff_balanced", "K in {1,3,5,7,9}, p_f x p_m on 0.01..0.99", tol, f);
}

/// Fused false alarm and miss rise with the local probabilities; fused false
/// alarm falls and fused miss rises with k.
inline ClaimResult fusion_monotonicity(int max_k = 25) {
  using rfusion::detail::compare;
  using rfusion::detail::fused_false_alarm;
  using rfusion::detail::fused_miss;
  detail::Failure f;
  const auto grid = detail::unit_grid(100);
  for (int K = 1; K <= max_k; ++K) {
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 1; i < grid.size(); ++i) {
        const LogProb a = LogProb::from_prob(grid[i - 1]);
        const LogProb b = LogProb::from_prob(grid[i]);
        // Strict on the smaller of value and complement, non-strict on the plain values.
        const bool pf_up = compare(fused_false_alarm(b, K, k), fused_false_alarm(a, K, k)) > 0 &&
                           pf_fusion(grid[i], K, k) >= pf_fusion(grid[i - 1], K, k);
        const bool pm_up = compare(fused_miss(b, K, k), fused_miss(a, K, k)) > 0 &&
                           pm_fusion(grid[i], K, k) >= pm_fusion(grid[i - 1], K, k);
        if (!pf_up) f.note("P_FO not increasing: K=", K, " k=", k, " p=", grid[i]);
        if (!pm_up) f.note("P_MO not increasing: K=", K, " k=", k, " p=", grid[i]);
      }
      if (k + 1 < K) {
        for (double p : grid) {
          const LogProb lp = LogProb::from_prob(p);
          if (!(compare(fused_false_alarm(lp, K, k + 1), fused_false_alarm(lp, K, k)) < 0)) {
            f.note("P_FO not decreasing in k: K=", K, " k=", k, " p=", p);
          }
          if (!(compare(fused_miss(lp, K, k + 1), fused_miss(lp, K, k)) > 0)) {
            f.note("P_MO not increasing in k: K=", K, " k=", k, " p=", p);
          }
        }
      }
    }
  }
  return detail::finish("fusion_monotonicity", "K <= " + std::to_string(max_k) + ", k < K, p = 0.01..0.99", 0.0, f);
}

/// h^K_k is increasing, lies above the diagonal for k < floor(K/2) and below
/// it for k > floor(K/2), and decreases in k.
inline ClaimResult fusion_map_shape(int max_k = 25) {
  detail::Failure f;
  const auto grid = detail::unit_grid(100);
  for (int K = 1; K <= max_k; ++K) {
    std::vector<std::vector<double>> z(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      for (double p : grid) z[k].push_back(h_map_logit(K, k, logit(p)));
    }
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double zp = logit(grid[i]);
        if (i > 0 && !(z[k][i] > z[k][i - 1])) f.note("h not increasing: K=", K, " k=", k, " p=", grid[i]);
        if (k < K / 2 && !(z[k][i] > zp)) f.note("h not above diagonal: K=", K, " k=", k, " p=", grid[i]);
        if (k > K / 2 && !(z[k][i] < zp)) f.note("h not below diagonal: K=", K, " k=", k, " p=", grid[i]);
        if (k + 1 < K && !(z[k][i] > z[k + 1][i])) f.note("h not ordered in k: K=", K, " k=", k, " p=", grid[i]);
      }
    }
  }
  return detail::finish("fusion_map_shape", "K <= " + std::to_string(max_k) + ", k < K, p = 0.01..0.99", 0.0, f);
}

/// h^K_k and h^K_{K-1-k} are inverse maps (for odd K: floor(K/2) -/+ m).
inline ClaimResult fusion_map_inverse_symmetry(int max_k = 25, double tol = 1e-9) {
  detail::Failure f;
  for (int K = 1; K <= max_k; ++K) {
    for (int k = 0; k < K; ++k) {
      const int inv = inverse_threshold(K, k);
      for (double p : detail::unit_grid(100)) {
        const double back = logistic(h_map_logit(K, inv, h_map_logit(K, k, logit(p))));
        if (std::abs(back - p) > tol) f.note("K=", K, " k=", k, " p=", p, " back=", back);
      }
      if (K % 2 == 1 && k == K / 2) {
        for (double p : detail::unit_grid(100)) {
          const double h = h_map({K, k, p});
          if (std::abs(h - p) > tol) f.note("middle threshold not identity: K=", K, " p=", p);
        }
      }
    }
  }
  return detail::finish("fusion_map_inverse_symmetry", "K <= " + std::to_string(max_k) + ", k < K, p = 0.01..0.99",
                        tol, f);
}

/// Scanning every threshold k, the best balanced error is theta_hat^K/(1+theta_hat^K)
/// and it is attained at k = 0 or k = K-1.
inline ClaimResult threshold_zero_optimal(int max_k = 11, double tol = 1e-10) {
  detail::Failure f;
  for (int K = 1; K <= max_k; K += 2) {
    for (int t = 1; t <= 9; ++t) {
      const double theta = 0.05 * t;
      const auto scan = scan_fusion_thresholds(K, theta);
      double best = scan.front().at.error;
      for (const auto& e : scan) best = std::min(best, e.at.error);
      const double expected = wf_optimum_error(K, theta);
      if (std::abs(best - expected) > tol) f.note("K=", K, " theta=", theta, " scan=", best, " closed=", expected);
      for (const auto& e : scan) {
        const bool is_min = e.at.error <= best * (1.0 + 1e-9);
        if (is_min && e.k != 0 && e.k != K - 1) f.note("argmin k=", e.k, " at K=", K, " theta=", theta);
      }
    }
  }
  return detail::finish("threshold_zero_optimal", "odd K <= " + std::to_string(max_k) + ", theta = 0.05..0.45", tol, f);
}

/// sup over theta of the fusion-center gain grows with K toward 1/2.
inline ClaimResult sup_loss_trend() {
  detail::Failure f;
  double prev = -1.0;
  for (int K : {11, 101, 1001, 10001}) {
    const WfLossSupremum s = sup_wf_loss(K);
    if (!(s.loss_star > prev)) f.note("not increasing at K=", K);
    if (!(s.loss_star < 0.5)) f.note("reached 1/2 at K=", K);
    prev = s.loss_star;
    if (K == 10001 && !(s.loss_star > 0.45)) f.note("K=10001 sup=", s.loss_star);
  }
  return detail::finish("sup_loss_trend", "K in {11,101,1001,10001}", 0.0, f);
}

/// Non-identical sensors on l1 under k = 0 fusion: balance forces
/// prod p_m = theta_hat^K/(1+theta_hat^K).
inline ClaimResult nonidentical_product(double tol = 1e-10) {
  detail::Failure f;
  for (double theta : {0.1, 0.25, 0.4}) {
    const ButterflyRegion region(theta);
    for (int K : {1, 2, 3, 5}) {
      const double target = logistic(K * std::log(region.theta_hat()));
      // Spread the product unevenly: weights 1, 2, ..., K in the log.
      std::vector<OperatingPoint> pts;
      const double wsum = 0.5 * K * (K + 1);
      bool feasible = true;
      for (int i = 1; i <= K; ++i) {
        const double pm = std::exp(std::log(target) * i / wsum);
        if (pm > region.theta_hat()) feasible = false;
        pts.push_back({1.0 - pm / region.theta_hat(), pm});
      }
      if (!feasible) {
        pts.assign(static_cast<std::size_t>(K), OperatingPoint{});
        const double pm = std::pow(target, 1.0 / K);
        for (auto& p : pts) p = {1.0 - pm / region.theta_hat(), pm};
      }
      const NonidenticalCheck c = nonidentical_product_check(pts, theta);
      if (!c.condition_holds) f.note("balance fails: theta=", theta, " K=", K);
      if (std::abs(c.product_error - target) > tol) f.note("product error: theta=", theta, " K=", K);
      if (std::abs(c.false_alarm - c.product_error) > tol) f.note("not balanced: theta=", theta, " K=", K);
    }
  }
  return detail::finish("nonidentical_product", "theta in {0.1,0.25,0.4}, K in {1,2,3,5}", tol, f);
}

/// K2 = 3 at theta = 0.2 maps to K1 = 2, and some theta maps K2 = 101 to K1 = 19.
inline ClaimResult equivalent_count() {
  detail::Failure f;
  if (equivalent_sensor_count(3, 0.2) != 2) f.note("K2=3 theta=0.2 gave ", equivalent_sensor_count(3, 0.2));
  const auto iv = theta_interval_for_count(101, 19, 1e-3);
  if (!iv) f.note("no theta gives K2=101 -> K1=19");
  return detail::finish("equivalent_count", "theta = 0.001..0.499 step 0.001", 0.0, f);
}

/// Uncoupled cost tensors converge at once to a model-independent threshold.
inline ClaimResult decoupled_thresholds(double tol = 1e-12) {
  detail::Failure f;
  const std::vector<CostTensor2> tensors = {
      CostTensor2::minimum_error(),
      CostTensor2::additive({{{2.0, 0.0}, {0.0, 1.0}}}),
      CostTensor2::additive({{{0.0, 3.0}, {1.5, 0.25}}}),
  };
  for (const auto& costs : tensors) {
    if (!is_decoupling(costs)) f.note("tensor not decoupling");
    for (double pi0 : {0.25, 0.5, 0.7}) {
      const RiskParams pr{pi0};
      const double expected = std::log(pi0 * costs.c_a() / (pr.pi1() * costs.c_c()));
      for (double theta : {0.1, 0.2, 0.3}) {
        for (MissWeighting w : {MissWeighting::h0_density, MissWeighting::h1_density}) {
          const PbpoResult r = pbpo_thresholds(costs, pr, model_from_theta(theta), {w});
          if (!r.converged || r.iterations > 2) f.note("iterations=", r.iterations, " pi0=", pi0);
          if (std::abs(r.sensor1.log_lr_threshold - expected) > tol ||
              std::abs(r.sensor2.log_lr_threshold - expected) > tol) {
            f.note("threshold moved: pi0=", pi0, " theta=", theta);
          }
        }
      }
    }
  }
  return detail::finish("decoupled_thresholds", "3 tensors x pi0 {0.25,0.5,0.7} x theta {0.1,0.2,0.3}", tol, f);
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"props", "theorem1", "prop2", "pbpo", "all"};
  return names;
}

inline bool is_suite(std::string_view name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

inline std::vector<ClaimResult> run_suite(std::string_view name) {
  std::vector<ClaimResult> out;
  const bool all = name == "all";
  if (all || name == "props") {
    out.push_back(robust_iff_balanced());
    out.push_back(consensus_complementarity());
    out.push_back(fusion_monotonicity());
    out.push_back(fusion_map_shape());
    out.push_back(fusion_map_inverse_symmetry());
  }
  if (all || name == "prop2") out.push_back(odd_even_equality());
  if (all || name == "theorem1") {
    out.push_back(threshold_zero_optimal());
    out.push_back(sup_loss_trend());
    out.push_back(nonidentical_product());
    out.push_back(equivalent_count());
  }
  if (all || name == "pbpo") out.push_back(decoupled_thresholds());
  if (out.empty()) throw std::invalid_argument("unknown suite: " + std::string(name));
  return out;
}

}  // namespace rfusion::verify
