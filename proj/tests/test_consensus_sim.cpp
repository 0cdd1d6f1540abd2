#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "oracles.hpp"
#include "rfusion/consensus_sim.hpp"

using namespace rfusion;

namespace {

int direct_majority(const std::vector<int>& bits, bool coin) {
  int a = 0;
  for (int b : bits) a += b;
  const int K = static_cast<int>(bits.size());
  if (2 * a > K) return 1;
  if (2 * a < K) return 0;
  return coin ? 1 : 0;
}

void expect_within(double est, double analytic, std::uint64_t n, double sigmas) {
  const double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n));
  EXPECT_LE(std::abs(est - analytic), sigmas * se) << est << " vs " << analytic;
}

}  // namespace

TEST(Rng, CounterBitsAreDeterministicAndSpread) {
  EXPECT_EQ(rng::counter_bits(1, 0, 5, 2), rng::counter_bits(1, 0, 5, 2));
  std::set<std::uint64_t> seen;
  for (int h = 0; h < 2; ++h)
    for (std::uint64_t t = 0; t < 50; ++t)
      for (std::uint64_t l = 0; l < 10; ++l) seen.insert(rng::counter_bits(7, h, t, l));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(rng::counter_bits(1, 0, 0, 0), rng::counter_bits(2, 0, 0, 0));
}

TEST(Rng, OpenUnitRangeAndMean) {
  EXPECT_GT(rng::to_open_unit(0), 0.0);
  EXPECT_LT(rng::to_open_unit(~std::uint64_t{0}), 1.0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng::to_open_unit(rng::counter_bits(3, 0, i, 0));
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Topology, RingShapes) {
  EXPECT_TRUE(ring_topology(1)[0].empty());
  EXPECT_EQ(ring_topology(2)[0], std::vector<int>{1});
  const Adjacency r5 = ring_topology(5);
  EXPECT_EQ(r5[0], (std::vector<int>{4, 1}));
  EXPECT_EQ(r5[4], (std::vector<int>{3, 0}));
  for (int K = 1; K <= 9; ++K) EXPECT_TRUE(is_connected(ring_topology(K)));
  EXPECT_THROW(ring_topology(0), std::domain_error);
}

TEST(Topology, DisconnectedRejected) {
  NetworkConfig c = NetworkConfig::ring(4, 10, 1);
  c.topology = {{1}, {0}, {3}, {2}};
  EXPECT_FALSE(is_connected(c.topology));
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.topology = {{1}, {0}, {5}, {2}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.topology = {{1}, {0}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(estimate_errors(model_from_theta(0.2), c, SystemSpec::without_center()), std::invalid_argument);
}

TEST(Gossip, Examples) {
  const GossipResult all = gossip_majority({1, 1, 1, 1, 1}, ring_topology(5), 5, false);
  EXPECT_EQ(all.decision, 1);
  EXPECT_EQ(all.rounds, 1);
  EXPECT_TRUE(all.agreed);
  const GossipResult g = gossip_majority({1, 1, 0}, ring_topology(3), 3, false);
  EXPECT_EQ(g.decision, 1);
  EXPECT_TRUE(g.agreed);
  // Two blocks of two are stable; the budget runs out.
  const GossipResult stuck = gossip_majority({1, 1, 0, 0, 0}, ring_topology(5), 5, true);
  EXPECT_FALSE(stuck.agreed);
  EXPECT_EQ(stuck.decision, 0);
  EXPECT_EQ(stuck.rounds, 5);
}

TEST(Gossip, SingleSensor) {
  EXPECT_EQ(gossip_majority({1}, ring_topology(1), 1, false).decision, 1);
  EXPECT_EQ(gossip_majority({0}, ring_topology(1), 1, true).decision, 0);
}

TEST(Gossip, RingAgreesWithDirectMajorityExhaustively) {
  for (int K = 1; K <= 9; ++K) {
    const Adjacency adj = ring_topology(K);
    for (unsigned m = 0; m < (1u << K); ++m) {
      std::vector<int> bits(static_cast<std::size_t>(K));
      for (int i = 0; i < K; ++i) bits[i] = static_cast<int>((m >> i) & 1u);
      for (bool coin : {false, true}) {
        const GossipResult g = gossip_majority(bits, adj, K, coin);
        EXPECT_EQ(g.decision, direct_majority(bits, coin)) << K << " " << m << " " << coin;
      }
    }
  }
}

TEST(Simulation, DeterministicAndThreadInvariant) {
  const GaussianShiftModel m = model_from_theta(0.2);
  NetworkConfig c = NetworkConfig::ring(5, 20000, 42);
  const TrialStats a = estimate_errors(m, c, SystemSpec::without_center());
  const TrialStats b = estimate_errors(m, c, SystemSpec::without_center());
  EXPECT_EQ(a, b);
  c.threads = 4;
  EXPECT_EQ(estimate_errors(m, c, SystemSpec::without_center()), a);
  c.threads = 3;
  const SystemSpec wf = SystemSpec::with_center(FusionRule::counting(5, 0));
  const TrialStats w3 = estimate_errors(m, c, wf);
  c.threads = 1;
  EXPECT_EQ(estimate_errors(m, c, wf), w3);
  c.seed = 43;
  EXPECT_NE(estimate_errors(m, c, SystemSpec::without_center()), a);
}

TEST(Simulation, Errors) {
  const GaussianShiftModel m = model_from_theta(0.2);
  NetworkConfig c = NetworkConfig::ring(3, 0, 1);
  EXPECT_THROW(estimate_errors(m, c, SystemSpec::without_center()), std::invalid_argument);
  c.trials = 10;
  EXPECT_THROW(estimate_errors(m, c, SystemSpec::with_center(FusionRule::counting(5, 0))), std::invalid_argument);
  EXPECT_THROW(run_wof_trial(m, c, 2, 0), std::invalid_argument);
}

TEST(Simulation, WithoutCenterMatchesMajority) {
  const GaussianShiftModel m = model_from_theta(0.2);
  const NetworkConfig c = NetworkConfig::ring(5, 100000, 2024);
  const TrialStats s = estimate_errors(m, c, SystemSpec::without_center());
  const OperatingPoint a = analytic_errors(m, c, SystemSpec::without_center());
  EXPECT_NEAR(a.p_f, consensus_error(5, 0.2), 1e-12);
  EXPECT_NEAR(a.p_f, a.p_m, 1e-12);
  expect_within(s.est_pf, a.p_f, s.trials_h0, 3.0);
  expect_within(s.est_pm, a.p_m, s.trials_h1, 3.0);
  EXPECT_GT(s.gossip_fallbacks, 0u);
}

TEST(Simulation, EvenRingUsesFairTie) {
  const GaussianShiftModel m = model_from_theta(0.3);
  const NetworkConfig c = NetworkConfig::ring(4, 100000, 9);
  const TrialStats s = estimate_errors(m, c, SystemSpec::without_center());
  const double expected = oracle::majority_false_alarm(4, 0.3);
  EXPECT_NEAR(analytic_errors(m, c, SystemSpec::without_center()).p_f, expected, 1e-12);
  expect_within(s.est_pf, expected, s.trials_h0, 4.0);
}

TEST(Simulation, FusionCenterOrRuleOnL1) {
  const double theta = 0.2;
  const GaussianShiftModel m = model_from_theta(theta);
  NetworkConfig c = NetworkConfig::ring(3, 200000, 77);
  c.local_threshold = m.threshold_for_miss(theta / (1.0 - theta));
  const SystemSpec wf = SystemSpec::with_center(FusionRule::counting(3, 0));
  const OperatingPoint a = analytic_errors(m, c, wf);
  EXPECT_NEAR(a.p_m, 0.015625, 1e-15);
  const TrialStats s = estimate_errors(m, c, wf);
  expect_within(s.est_pm, a.p_m, s.trials_h1, 3.0);
  expect_within(s.est_pf, a.p_f, s.trials_h0, 3.0);
  EXPECT_EQ(s.gossip_fallbacks, 0u);
}

TEST(Simulation, SingleSensorAndAndRule) {
  const GaussianShiftModel m = model_from_theta(0.25);
  const NetworkConfig one = NetworkConfig::ring(1, 50000, 5);
  const TrialStats s1 = estimate_errors(m, one, SystemSpec::without_center());
  expect_within(s1.est_pf, 0.25, s1.trials_h0, 4.0);
  const NetworkConfig three = NetworkConfig::ring(3, 50000, 5);
  const SystemSpec all = SystemSpec::with_center(FusionRule::counting(3, 2));
  const OperatingPoint a = analytic_errors(m, three, all);
  EXPECT_NEAR(a.p_f, std::pow(0.25, 3), 1e-15);
  EXPECT_NEAR(a.p_m, 1.0 - std::pow(0.75, 3), 1e-15);
  const TrialStats s = estimate_errors(m, three, all);
  expect_within(s.est_pf, a.p_f, s.trials_h0, 4.0);
  expect_within(s.est_pm, a.p_m, s.trials_h1, 4.0);
}
