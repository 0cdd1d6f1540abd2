#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracles.hpp"
#include "rfusion/fusion_center.hpp"

using namespace rfusion;

namespace {

double theta_hat(double t) { return t / (1.0 - t); }

std::vector<double> coarse_grid() {
  std::vector<double> g;
  for (int i = 1; i < 20; ++i) g.push_back(i / 20.0);
  return g;
}

}  // namespace

TEST(FusedErrors, Examples) {
  EXPECT_NEAR(pf_fusion(0.3, 1, 0), 0.3, 1e-15);
  EXPECT_NEAR(pf_fusion(0.2, 3, 1), 0.104, 1e-15);
  for (int K : {1, 4, 9}) EXPECT_EQ(pf_fusion(0.77, K, K), 0.0);
  EXPECT_NEAR(pm_fusion(0.3, 1, 0), 0.3, 1e-15);
  EXPECT_NEAR(pm_fusion(theta_hat(0.2), 3, 0), 0.015625, 1e-16);
  for (int K : {1, 4, 9}) {
    for (int k = 0; k <= K; ++k) EXPECT_EQ(pm_fusion(1.0, K, k), 1.0);
  }
}

TEST(FusedErrors, Errors) {
  EXPECT_THROW(pf_fusion(0.2, 3, 4), std::domain_error);
  EXPECT_THROW(pf_fusion(0.2, 3, -1), std::domain_error);
  EXPECT_THROW(pm_fusion(1.2, 3, 1), std::domain_error);
  EXPECT_THROW(pm_fusion(0.2, 0, 0), std::domain_error);
}

TEST(FusedErrors, MatchOracleSums) {
  for (int K = 1; K <= 20; ++K) {
    for (int k = 0; k <= K; ++k) {
      for (double p : coarse_grid()) {
        const double fa = 1.0 - oracle::cdf(k, K, p);
        const double miss = oracle::cdf(k, K, 1.0 - p);
        EXPECT_NEAR(pf_fusion(p, K, k), fa, 1e-14) << K << " " << k << " " << p;
        EXPECT_NEAR(pm_fusion(p, K, k), miss, 1e-14) << K << " " << k << " " << p;
      }
    }
  }
}

TEST(FusedErrors, OrAndLabelsByEnumeration) {
  // k = 0 fires on any alarm, k = K - 1 only when every sensor alarms.
  const int K = 3;
  for (double p : {0.1, 0.4}) {
    double any = 0.0;
    double all = 0.0;
    oracle::for_each_pattern(K, p, [&](const std::vector<int>& bits, long double w) {
      const int a = bits[0] + bits[1] + bits[2];
      if (a > 0) any += static_cast<double>(w);
      if (a == K) all += static_cast<double>(w);
    });
    EXPECT_NEAR(pf_fusion(p, K, 0), any, 1e-15);
    EXPECT_NEAR(pf_fusion(p, K, K - 1), all, 1e-15);
  }
}

TEST(FusedErrors, MonotoneInProbabilityAndThreshold) {
  for (int K = 1; K <= 25; ++K) {
    for (int k = 0; k < K; ++k) {
      double prev_f = -1.0;
      double prev_m = -1.0;
      for (int i = 1; i < 100; ++i) {
        const double p = i / 100.0;
        const double f = pf_fusion(p, K, k);
        const double m = pm_fusion(p, K, k);
        EXPECT_GE(f, prev_f);
        EXPECT_GE(m, prev_m);
        prev_f = f;
        prev_m = m;
        EXPECT_GE(pf_fusion(p, K, k), pf_fusion(p, K, k + 1));
        EXPECT_LE(pm_fusion(p, K, k), pm_fusion(p, K, k + 1));
      }
    }
  }
}

TEST(FusedErrors, DerivativeSignByFiniteDifference) {
  for (int K : {2, 5, 11}) {
    for (int k = 0; k < K; ++k) {
      for (double p : {0.1, 0.3, 0.5, 0.7}) {
        const double h = 1e-6;
        EXPECT_GT(pf_fusion(p + h, K, k) - pf_fusion(p - h, K, k), 0.0);
        EXPECT_GT(pm_fusion(p + h, K, k) - pm_fusion(p - h, K, k), 0.0);
      }
    }
  }
}

TEST(HMap, Examples) {
  EXPECT_NEAR(h_map({3, 1, 0.37}), 0.37, 1e-12);
  EXPECT_NEAR(h_map({2, 0, 0.5}), std::sqrt(0.75), 1e-12);
  EXPECT_GT(h_map({5, 1, 0.2}), 0.2);
  EXPECT_EQ(h_map({5, 1, 0.0}), 0.0);
  EXPECT_EQ(h_map({5, 1, 1.0}), 1.0);
}

TEST(HMap, Errors) {
  EXPECT_THROW(h_map({3, 3, 0.2}), std::domain_error);
  EXPECT_THROW(h_map({3, 4, 0.2}), std::domain_error);
  EXPECT_THROW(h_map({3, 1, 1.2}), std::domain_error);
  EXPECT_THROW(h_map_logit(3, 3, 0.0), std::domain_error);
}

TEST(HMap, OrRuleClosedForm) {
  for (int K = 1; K <= 10; ++K) {
    for (double p : coarse_grid()) {
      EXPECT_NEAR(h_map({K, 0, p}), std::pow(1.0 - std::pow(1.0 - p, K), 1.0 / K), 1e-12) << K << " " << p;
    }
  }
}

TEST(HMap, MatchesPlainBisectionOracle) {
  for (int K = 1; K <= 12; ++K) {
    for (int k = 0; k < K; ++k) {
      for (double p : {0.1, 0.35, 0.6}) {
        EXPECT_NEAR(h_map({K, k, p}), oracle::h_map(K, k, p), 1e-10) << K << " " << k << " " << p;
      }
    }
  }
}

TEST(HMap, BalancesFusedErrors) {
  for (int K = 1; K <= 15; ++K) {
    for (int k = 0; k < K; ++k) {
      for (double p : coarse_grid()) {
        const double h = h_map({K, k, p});
        const double fa = pf_fusion(p, K, k);
        EXPECT_NEAR(pm_fusion(h, K, k), fa, 1e-9 * std::max(fa, 1e-12)) << K << " " << k << " " << p;
      }
    }
  }
}

TEST(HMap, ShapeOrderingAndInverseSymmetry) {
  for (int K = 1; K <= 25; ++K) {
    for (int k = 0; k < K; ++k) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double p : coarse_grid()) {
        const double z = h_map_logit(K, k, logit(p));
        EXPECT_GT(z, prev);
        prev = z;
        if (k < K / 2) EXPECT_GT(z, logit(p));
        if (k > K / 2) EXPECT_LT(z, logit(p));
        if (k + 1 < K) EXPECT_GT(z, h_map_logit(K, k + 1, logit(p)));
        const double back = logistic(h_map_logit(K, inverse_threshold(K, k), z));
        EXPECT_NEAR(back, p, 1e-9) << K << " " << k << " " << p;
      }
    }
  }
}

TEST(HMap, OddKMiddleSymmetry) {
  // floor(K/2) + m inverts floor(K/2) - m.
  for (int K : {3, 5, 9, 13}) {
    for (int m = 0; m <= K / 2; ++m) EXPECT_EQ(inverse_threshold(K, K / 2 + m), K / 2 - m);
  }
}

TEST(IntersectL1, ApexAtMiddleThreshold) {
  const LineIntersection at = intersect_l1(3, 1, 0.2);
  EXPECT_TRUE(at.at_apex);
  EXPECT_NEAR(at.point.p_f, 0.2, 1e-15);
  EXPECT_NEAR(at.point.p_m, 0.2, 1e-15);
}

TEST(IntersectL1, OrRuleSatisfiesSetConditionAndFixedPoint) {
  for (double t : {0.05, 0.2, 0.35}) {
    for (int K : {1, 3, 5, 9}) {
      const LineIntersection at = intersect_l1(K, 0, t);
      const double th = theta_hat(t);
      EXPECT_EQ(at.at_apex, K == 1);
      EXPECT_NEAR(at.point.p_m, th * at.x_m, 1e-15);
      EXPECT_NEAR(pf_fusion(at.point.p_f, K, 0), pm_fusion(at.point.p_m, K, 0), 1e-10);
      const double rhs = 1.0 / (std::pow(th, K) * intersection_f1(K, 0, at.x_m, th) + intersection_f2(K, 0, at.x_m));
      EXPECT_NEAR(std::pow(at.x_m, K), rhs, 1e-10);
      EXPECT_NEAR(at.error, wf_optimum_error(K, t), 1e-12);
    }
  }
}

TEST(IntersectL1, FixedPointIdentityForInteriorThresholds) {
  for (int K : {5, 7, 11}) {
    for (int k = 1; k < K / 2; ++k) {
      const double t = 0.2;
      const LineIntersection at = intersect_l1(K, k, t);
      const double th = theta_hat(t);
      const double rhs = 1.0 / (std::pow(th, K) * intersection_f1(K, k, at.x_m, th) + intersection_f2(K, k, at.x_m));
      EXPECT_NEAR(std::pow(at.x_m, K), rhs, 1e-10) << K << " " << k;
    }
  }
}

TEST(IntersectL1, XOrderingAcrossThresholds) {
  for (int K : {5, 7, 9}) {
    double prev = 2.0;
    for (int k = 0; k <= K / 2; ++k) {
      const double x = intersect_l1(K, k, 0.25).x_m;
      EXPECT_LT(x, prev) << K << " " << k;
      prev = x;
    }
  }
}

TEST(IntersectL1, DomainChecks) {
  EXPECT_THROW(intersect_l1(5, 3, 0.2), std::domain_error);
  EXPECT_THROW(intersect_l1(5, 1, 0.5), std::domain_error);
  EXPECT_THROW(intersect_l2(5, 1, 0.2), std::domain_error);
  EXPECT_THROW(intersect_l2(5, 5, 0.2), std::domain_error);
}

TEST(IntersectL2, MirrorsL1) {
  for (int K : {3, 5, 7}) {
    for (int k = 0; k <= K / 2; ++k) {
      const LineIntersection a = intersect_l1(K, k, 0.3);
      const LineIntersection b = intersect_l2(K, K - 1 - k, 0.3);
      EXPECT_NEAR(a.point.p_f, b.point.p_m, 1e-12);
      EXPECT_NEAR(a.point.p_m, b.point.p_f, 1e-12);
      EXPECT_NEAR(a.error, b.error, 1e-12);
    }
  }
}

TEST(ErrorGap, PositiveAndTwoPathsAgree) {
  EXPECT_GT(error_gap(5, 1, 0.2), 0.0);
  EXPECT_GT(error_gap(3, 1, 0.3), 0.0);
  for (int K : {3, 5, 7, 9, 11}) {
    for (int k = 1; k <= K / 2; ++k) {
      for (double t : {0.1, 0.2, 0.3, 0.4}) {
        EXPECT_GT(error_gap(K, k, t), 0.0);
        EXPECT_NEAR(error_gap(K, k, t), error_gap_closed_form(K, k, t), 1e-10);
      }
    }
  }
  EXPECT_THROW(error_gap(5, 0, 0.2), std::domain_error);
}

TEST(MaxWfLoss, Examples) {
  const WfLossReport r = max_wf_loss(3, 0.2);
  EXPECT_NEAR(r.wof_error, 0.104, 1e-15);
  EXPECT_NEAR(r.wf_error, 0.015625 / 1.015625, 1e-15);
  EXPECT_NEAR(r.loss, 0.0886153846153846, 1e-14);
  EXPECT_EQ(r.best_k, 0);
  EXPECT_TRUE(r.brute_force_checked);
  EXPECT_TRUE(r.brute_force_agrees);
  EXPECT_NEAR(max_wf_loss(1, 0.2).loss, 0.0, 1e-16);
  EXPECT_THROW(max_wf_loss(4, 0.2), std::invalid_argument);
  EXPECT_THROW(max_wf_loss(3, 0.5), std::domain_error);
}

TEST(MaxWfLoss, BruteForceFiveSensors) {
  const auto scan = scan_fusion_thresholds(5, 0.3);
  double best = 1.0;
  for (const auto& e : scan) best = std::min(best, e.at.error);
  const double th5 = std::pow(theta_hat(0.3), 5);
  EXPECT_NEAR(best, th5 / (1.0 + th5), 1e-10);
}

TEST(MaxWfLoss, TheoremBruteForceAgainstOracleIntersections) {
  // Independent check: plain bisection on l1 for each k <= floor(K/2), l2 by mirror.
  for (int K = 1; K <= 11; K += 2) {
    for (int i = 1; i <= 9; ++i) {
      const double t = 0.05 * i;
      const double th = theta_hat(t);
      double best = 1.0;
      int arg = -1;
      for (int k = 0; k <= K / 2; ++k) {
        double lo = 0.0;
        double hi = t;
        const auto res = [&](double pf) { return (1.0 - oracle::cdf(k, K, pf)) - oracle::cdf(k, K, 1.0 - th * (1.0 - pf)); };
        if (res(hi) <= 0.0) {
          lo = hi;
        } else {
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (res(mid) > 0.0 ? hi : lo) = mid;
          }
        }
        const double err = 1.0 - oracle::cdf(k, K, lo);
        if (err < best * (1.0 - 1e-9)) {
          best = err;
          arg = k;
        }
      }
      EXPECT_NEAR(best, wf_optimum_error(K, t), 1e-10) << K << " " << t;
      if (t >= 0.15) EXPECT_EQ(arg, 0) << K << " " << t;
      const WfLossReport r = max_wf_loss(K, t);
      EXPECT_TRUE(r.brute_force_agrees) << K << " " << t;
      EXPECT_GE(r.loss, 0.0);
    }
  }
}

TEST(SupWfLoss, TrendAndFrozenValues) {
  const double expected[] = {0.27586, 0.40305, 0.46182, 0.48561};
  const int Ks[] = {11, 101, 1001, 10001};
  double prev = 0.0;
  for (int i = 0; i < 4; ++i) {
    const WfLossSupremum s = sup_wf_loss(Ks[i]);
    EXPECT_NEAR(s.loss_star, expected[i], 1e-5) << Ks[i];
    EXPECT_GT(s.loss_star, prev);
    EXPECT_LT(s.loss_star, 0.5);
    EXPECT_NEAR(wf_loss_value(Ks[i], s.theta_star), s.loss_star, 1e-15);
    prev = s.loss_star;
  }
  EXPECT_GT(prev, 0.45);
  EXPECT_THROW(sup_wf_loss(10), std::invalid_argument);
}

TEST(SupWfLoss, ThetaStarApproachesHalf) {
  double prev = 0.0;
  for (int K : {11, 101, 1001}) {
    const double t = sup_wf_loss(K).theta_star;
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(Nonidentical, IdenticalPointsAtOptimum) {
  for (int K : {1, 3, 6}) {
    const double t = 0.3;
    const LineIntersection at = intersect_l1(K, 0, t);
    const std::vector<OperatingPoint> pts(static_cast<std::size_t>(K), at.point);
    const NonidenticalCheck c = nonidentical_product_check(pts, t);
    EXPECT_TRUE(c.condition_holds);
    EXPECT_NEAR(c.product_error, wf_optimum_error(K, t), 1e-12);
  }
}

TEST(Nonidentical, TwoDistinctPoints) {
  const double t = 0.25;
  const double th = theta_hat(t);
  const double target = th * th / (1.0 + th * th);
  // p_m1 p_m2 = target with p_m1 != p_m2, both on l1.
  const double pm1 = 0.32;
  const double pm2 = target / pm1;
  ASSERT_LT(pm2, th);
  const std::vector<OperatingPoint> pts = {{1.0 - pm1 / th, pm1}, {1.0 - pm2 / th, pm2}};
  const NonidenticalCheck c = nonidentical_product_check(pts, t);
  EXPECT_TRUE(c.condition_holds);
  EXPECT_NEAR(c.product_error, target, 1e-15);
  EXPECT_NEAR(c.false_alarm, c.product_error, 1e-12);
}

TEST(Nonidentical, SingleSensorAtApex) {
  const NonidenticalCheck c = nonidentical_product_check({{0.3, 0.3}}, 0.3);
  EXPECT_TRUE(c.condition_holds);
  EXPECT_NEAR(c.product_error, c.false_alarm, 1e-15);
}

TEST(Nonidentical, Errors) {
  EXPECT_THROW(nonidentical_product_check({}, 0.3), std::domain_error);
  EXPECT_THROW(nonidentical_product_check({{0.3, 0.1}}, 0.3), std::domain_error);
}

TEST(EquivalentCount, Examples) {
  EXPECT_EQ(equivalent_sensor_count(3, 0.2), 2);
  for (double t : {0.05, 0.2, 0.45}) EXPECT_EQ(equivalent_sensor_count(1, t), 1);
  EXPECT_THROW(equivalent_sensor_count(4, 0.2), std::invalid_argument);
}

TEST(EquivalentCount, FusionCenterNetworkIsNoWorse) {
  for (int K2 : {3, 11, 101}) {
    for (double t : {0.1, 0.2, 0.3, 0.4}) {
      const int K1 = equivalent_sensor_count(K2, t);
      EXPECT_LE(wf_optimum_error(K1, t), consensus_error(K2, t) * (1.0 + 1e-12)) << K2 << " " << t;
      EXPECT_LE(K1, K2);
      if (K1 > 1) EXPECT_GT(wf_optimum_error(K1 - 1, t), consensus_error(K2, t));
    }
  }
}

TEST(EquivalentCount, HundredOneToNineteenInterval) {
  const auto iv = theta_interval_for_count(101, 19);
  ASSERT_TRUE(iv.has_value());
  EXPECT_LE(iv->lo, iv->hi);
  EXPECT_GT(iv->lo, 0.18);
  EXPECT_LT(iv->hi, 0.21);
  EXPECT_EQ(equivalent_sensor_count(101, 0.5 * (iv->lo + iv->hi)), 19);
  EXPECT_FALSE(theta_interval_for_count(3, 50, 1e-3).has_value());
}
