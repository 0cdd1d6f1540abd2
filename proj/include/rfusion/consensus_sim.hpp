#pragma once

// Monte Carlo simulation of sensor networks under the Gaussian shift model:
// majority-gossip consensus without a fusion center, and counting rules at
// a fusion center.
//
// Every random draw is a pure function of (seed, hypothesis, trial, lane),
// so trials can run in any order or in parallel and still give identical
// counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rfusion/binomial.hpp"
#include "rfusion/gaussian_model.hpp"
#include "rfusion/probability.hpp"

namespace rfusion {

namespace rng {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t kTieLane = ~std::uint64_t{0};

/// 64 random bits addressed by (seed, hypothesis, trial, lane).
inline std::uint64_t counter_bits(std::uint64_t seed, int hypothesis, std::uint64_t trial,
                                  std::uint64_t lane) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(hypothesis));
  h = mix64(h ^ trial);
  return mix64(h ^ lane);
}

/// Uniform on the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace rng

using Adjacency = std::vector<std::vector<int>>;

/// Ring on K nodes; node i talks to i - 1 and i + 1.
inline Adjacency ring_topology(int K) {
  detail::require_sensors(K);
  Adjacency adj(static_cast<std::size_t>(K));
  if (K == 1) return adj;
  if (K == 2) {
    adj[0] = {1};
    adj[1] = {0};
    return adj;
  }
  for (int i = 0; i < K; ++i) adj[i] = {(i + K - 1) % K, (i + 1) % K};
  return adj;
}

inline bool is_connected(const Adjacency& adj) {
  if (adj.empty()) return false;
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!todo.empty()) {
    const int v = todo.front();
    todo.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        todo.push(w);
      }
    }
  }
  return count == adj.size();
}

struct NetworkConfig {
  int sensors = 1;
  Adjacency topology;             ///< per-node neighbor lists
  int rounds = 0;                 ///< gossip budget; 0 means K rounds
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;       ///< trials per hypothesis
  std::optional<double> local_threshold;  ///< observation threshold; defaults to the model's minimax one
  unsigned threads = 1;

  static NetworkConfig ring(int K, std::uint64_t trials, std::uint64_t seed) {
    NetworkConfig c;
    c.sensors = K;
    c.topology = ring_topology(K);
    c.trials = trials;
    c.seed = seed;
    return c;
  }

  int round_budget() const noexcept { return rounds > 0 ? rounds : sensors; }

  void validate() const {
    detail::require_sensors(sensors);
    if (topology.size() != static_cast<std::size_t>(sensors)) {
      throw std::invalid_argument("topology must list neighbors for every sensor");
    }
    for (const auto& nbrs : topology) {
      for (int w : nbrs) {
        if (w < 0 || w >= sensors) throw std::invalid_argument("neighbor index out of range");
      }
    }
    if (!is_connected(topology)) throw std::invalid_argument("topology is not connected");
  }
};

struct GossipResult {
  int decision = 0;
  int rounds = 0;
  bool agreed = false;  ///< false: budget ran out and the direct majority was used
};

/// Synchronous local-majority gossip. Each round every node adopts the
/// majority of its own bit and its neighbors' bits; a node whose
/// neighborhood is split evenly adopts `tie_coin`. Stops on global
/// agreement. If the budget runs out first, falls back to the direct
/// majority of the initial bits with `tie_coin` on an even split.
inline GossipResult gossip_majority(const std::vector<int>& initial, const Adjacency& adj, int max_rounds,
                                    bool tie_coin) {
  const int K = static_cast<int>(initial.size());
  std::vector<int> state = initial;
  std::vector<int> next(state.size());
  for (int round = 1; round <= max_rounds; ++round) {
    for (int v = 0; v < K; ++v) {
      int ones = state[v];
      for (int w : adj[v]) ones += state[w];
      const int votes = static_cast<int>(adj[v].size()) + 1;
      if (2 * ones > votes) {
        next[v] = 1;
      } else if (2 * ones < votes) {
        next[v] = 0;
      } else {
        next[v] = tie_coin ? 1 : 0;
      }
    }
    state.swap(next);
    if (std::all_of(state.begin(), state.end(), [&](int b) { return b == state.front(); })) {
      return {state.front(), round, true};
    }
  }
  int alarms = 0;
  for (int b : initial) alarms += b;
  const FusionRule majority = FusionRule::majority(K);
  return {majority.decide(alarms, tie_coin && majority.tie_prob > 0.0), max_rounds, false};
}

namespace detail {

inline double observation_threshold(const GaussianShiftModel& model, const NetworkConfig& config) {
  return config.local_threshold.value_or(model.lrt_threshold);
}

inline std::vector<int> local_decisions(const GaussianShiftModel& model, const NetworkConfig& config, int hypothesis,
                                        std::uint64_t trial) {
  const double tau = observation_threshold(model, config);
  std::vector<int> bits(static_cast<std::size_t>(config.sensors));
  for (int i = 0; i < config.sensors; ++i) {
    const double u = rng::to_open_unit(rng::counter_bits(config.seed, hypothesis, trial, static_cast<std::uint64_t>(i)));
    const double y = normal_quantile(u) + (hypothesis == 1 ? model.mu : 0.0);
    bits[i] = y > tau ? 1 : 0;
  }
  return bits;
}

inline double tie_uniform(const NetworkConfig& config, int hypothesis, std::uint64_t trial) {
  return rng::to_open_unit(rng::counter_bits(config.seed, hypothesis, trial, rng::kTieLane));
}

inline void require_hypothesis(int h) {
  if (h != 0 && h != 1) throw std::invalid_argument("hypothesis must be 0 or 1");
}

}  // namespace detail

struct TrialOutcome {
  int decision = 0;
  int rounds = 0;
  bool fell_back = false;
};

/// One network decision without a fusion center.
inline TrialOutcome run_wof_trial(const GaussianShiftModel& model, const NetworkConfig& config, int hypothesis,
                                  std::uint64_t trial_index) {
  config.validate();
  detail::require_hypothesis(hypothesis);
  const auto bits = detail::local_decisions(model, config, hypothesis, trial_index);
  const bool coin = detail::tie_uniform(config, hypothesis, trial_index) < 0.5;
  const GossipResult g = gossip_majority(bits, config.topology, config.round_budget(), coin);
  return {g.decision, g.rounds, !g.agreed};
}

/// One fusion-center decision under a counting rule.
inline int run_wf_trial(const GaussianShiftModel& model, const NetworkConfig& config, const FusionRule& rule,
                        int hypothesis, std::uint64_t trial_index) {
  rule.validate();
  detail::require_sensors(config.sensors);
  detail::require_hypothesis(hypothesis);
  if (rule.sensors != config.sensors) throw std::invalid_argument("rule and network disagree on sensor count");
  const auto bits = detail::local_decisions(model, config, hypothesis, trial_index);
  int alarms = 0;
  for (int b : bits) alarms += b;
  const bool coin = detail::tie_uniform(config, hypothesis, trial_index) < rule.tie_prob;
  return rule.decide(alarms, coin);
}

/// Network under test: majority gossip, or a fusion center with `rule`.
struct SystemSpec {
  enum class Kind { wof, wf };
  Kind kind = Kind::wof;
  FusionRule rule{};

  static SystemSpec without_center() { return {}; }
  static SystemSpec with_center(const FusionRule& r) { return {Kind::wf, r}; }
};

struct TrialStats {
  std::uint64_t false_alarms = 0;
  std::uint64_t misses = 0;
  std::uint64_t trials_h0 = 0;
  std::uint64_t trials_h1 = 0;
  double est_pf = 0.0;
  double est_pm = 0.0;
  double stderr_pf = 0.0;
  double stderr_pm = 0.0;
  std::uint64_t gossip_fallbacks = 0;  ///< trials where gossip did not agree within budget

  friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

namespace detail {

struct Counts {
  std::uint64_t errors = 0;
  std::uint64_t fallbacks = 0;
};

inline Counts count_errors(const GaussianShiftModel& model, const NetworkConfig& config, const SystemSpec& system,
                           int hypothesis, std::uint64_t begin, std::uint64_t end) {
  Counts c;
  for (std::uint64_t t = begin; t < end; ++t) {
    int decision = 0;
    if (system.kind == SystemSpec::Kind::wof) {
      const TrialOutcome o = run_wof_trial(model, config, hypothesis, t);
      decision = o.decision;
      if (o.fell_back) ++c.fallbacks;
    } else {
      decision = run_wf_trial(model, config, system.rule, hypothesis, t);
    }
    if (decision != hypothesis) ++c.errors;
  }
  return c;
}

inline Counts count_errors_parallel(const GaussianShiftModel& model, const NetworkConfig& config,
                                    const SystemSpec& system, int hypothesis) {
  const unsigned workers = std::max(1u, config.threads);
  if (workers == 1) return count_errors(model, config, system, hypothesis, 0, config.trials);
  std::vector<Counts> partial(workers);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (config.trials + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min<std::uint64_t>(config.trials, w * chunk);
    const std::uint64_t end = std::min<std::uint64_t>(config.trials, begin + chunk);
    pool.emplace_back([&, w, begin, end] { partial[w] = count_errors(model, config, system, hypothesis, begin, end); });
  }
  for (auto& th : pool) th.join();
  Counts total;
  for (const auto& p : partial) {
    total.errors += p.errors;
    total.fallbacks += p.fallbacks;
  }
  return total;
}

}  // namespace detail

/// Empirical false alarm and miss of the network, `config.trials` trials per hypothesis.
inline TrialStats estimate_errors(const GaussianShiftModel& model, const NetworkConfig& config,
                                  const SystemSpec& system) {
  if (config.trials == 0) throw std::invalid_argument("estimate_errors needs at least one trial per hypothesis");
  config.validate();
  if (system.kind == SystemSpec::Kind::wf) system.rule.validate();

  const detail::Counts h0 = detail::count_errors_parallel(model, config, system, 0);
  const detail::Counts h1 = detail::count_errors_parallel(model, config, system, 1);
  TrialStats s;
  s.trials_h0 = config.trials;
  s.trials_h1 = config.trials;
  s.false_alarms = h0.errors;
  s.misses = h1.errors;
  s.gossip_fallbacks = h0.fallbacks + h1.fallbacks;
  s.est_pf = static_cast<double>(s.false_alarms) / static_cast<double>(s.trials_h0);
  s.est_pm = static_cast<double>(s.misses) / static_cast<double>(s.trials_h1);
  s.stderr_pf = std::sqrt(s.est_pf * (1.0 - s.est_pf) / static_cast<double>(s.trials_h0));
  s.stderr_pm = std::sqrt(s.est_pm * (1.0 - s.est_pm) / static_cast<double>(s.trials_h1));
  return s;
}

/// Exact fused (false alarm, miss) for the simulated network.
inline OperatingPoint analytic_errors(const GaussianShiftModel& model, const NetworkConfig& config,
                                      const SystemSpec& system) {
  const OperatingPoint local = model.operating_point(detail::observation_threshold(model, config));
  const FusionRule rule =
      system.kind == SystemSpec::Kind::wof ? FusionRule::majority(config.sensors) : system.rule;
  return {rule_false_alarm(rule, local.p_f), rule_miss(rule, local.p_m)};
}

}  // namespace rfusion
