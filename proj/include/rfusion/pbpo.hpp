#pragma once

// Person-by-person conditions for two sensors under a Bayesian cost tensor,
// and the robustness test for identical sensors under majority voting.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rfusion/binomial.hpp"
#include "rfusion/gaussian_model.hpp"
#include "rfusion/probability.hpp"

namespace rfusion {

/// Costs C[i1][i2][j] of local decisions (i1, i2) when H_j is true.
struct CostTensor2 {
  std::array<std::array<std::array<double, 2>, 2>, 2> c{};

  double operator()(int i1, int i2, int j) const { return c.at(i1).at(i2).at(j); }
  double& operator()(int i1, int i2, int j) { return c.at(i1).at(i2).at(j); }

  double c_a() const { return c[1][1][0] - c[0][1][0]; }
  double c_b() const { return c[1][0][0] - c[0][0][0] + c[0][1][0] - c[1][1][0]; }
  double c_c() const { return c[0][1][1] - c[1][1][1]; }
  double c_d() const { return c[0][0][1] - c[1][0][1] + c[1][1][1] - c[0][1][1]; }

  /// The same tensor seen from the second sensor.
  CostTensor2 swapped() const {
    CostTensor2 out;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < 2; ++j) out.c[a][b][j] = c[b][a][j];
    return out;
  }

  /// Sum of per-sensor costs: C[i1][i2][j] = single[i1][j] + single[i2][j].
  static CostTensor2 additive(const std::array<std::array<double, 2>, 2>& single) {
    CostTensor2 out;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < 2; ++j) out.c[a][b][j] = single[a][j] + single[b][j];
    return out;
  }

  /// Zero-one loss per sensor: C_ij = 0 for i == j, 1 otherwise.
  static CostTensor2 minimum_error() { return additive({{{0.0, 1.0}, {1.0, 0.0}}}); }
};

struct RiskParams {
  double pi0 = 0.5;

  double pi1() const noexcept { return 1.0 - pi0; }
  void validate() const { require_probability(pi0, "pi0"); }
};

/// Conditional joint decision probabilities P_j(phi1 = i1, phi2 = i2), indexed [j][i1][i2].
struct JointDecisions {
  std::array<std::array<std::array<double, 2>, 2>, 2> p{};

  /// Independent sensors at the given operating points.
  static JointDecisions independent(const OperatingPoint& s1, const OperatingPoint& s2) {
    require_valid(s1);
    require_valid(s2);
    JointDecisions out;
    // P_0(phi = 1) = p_f, P_1(phi = 0) = p_m.
    const std::array<std::array<double, 2>, 2> d1{{{1.0 - s1.p_f, s1.p_f}, {s1.p_m, 1.0 - s1.p_m}}};
    const std::array<std::array<double, 2>, 2> d2{{{1.0 - s2.p_f, s2.p_f}, {s2.p_m, 1.0 - s2.p_m}}};
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out.p[j][a][b] = d1[j][a] * d2[j][b];
    return out;
  }
};

/// Bayes risk sum_j pi_j sum_{i1,i2} C[i1][i2][j] P_j(i1, i2).
inline double risk_two_sensor(const CostTensor2& costs, const RiskParams& priors, const JointDecisions& joint) {
  priors.validate();
  double risk = 0.0;
  for (int j = 0; j < 2; ++j) {
    double total = 0.0;
    double row = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double p = joint.p[j][a][b];
        if (!is_probability(p)) throw std::invalid_argument("joint decision probability outside [0, 1]");
        total += p;
        row += costs(a, b, j) * p;
      }
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("joint decision probabilities under H" + std::to_string(j) + " do not sum to 1");
    }
    risk += (j == 0 ? priors.pi0 : priors.pi1()) * row;
  }
  return risk;
}

/// True iff the coupling costs C_b and C_d vanish, so each sensor's
/// threshold no longer depends on the other sensor's rule.
inline bool is_decoupling(const CostTensor2& costs) { return costs.c_b() == 0.0 && costs.c_d() == 0.0; }

class infeasible_costs : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Which density weights the miss-side integral of the threshold condition.
enum class MissWeighting {
  h0_density,  ///< integrate against p0(y2) on both sides
  h1_density,  ///< integrate against p1(y2) on the miss side
};

/// A sensor rule: declare H1 when the likelihood ratio is above (or, for a
/// reversed rule, below) exp(log_lr_threshold).
struct LocalRule {
  double log_lr_threshold = 0.0;
  bool reversed = false;
  double tau = 0.0;  ///< equivalent threshold on the observation
};

struct PbpoOptions {
  MissWeighting weighting = MissWeighting::h0_density;
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

struct PbpoResult {
  LocalRule sensor1{};
  LocalRule sensor2{};
  OperatingPoint point1{};
  OperatingPoint point2{};
  int iterations = 0;
  bool converged = false;

  double t1() const { return std::exp(sensor1.log_lr_threshold); }
  double t2() const { return std::exp(sensor2.log_lr_threshold); }
};

namespace detail {

inline OperatingPoint rule_point(const GaussianShiftModel& model, const LocalRule& r) {
  const OperatingPoint above = model.operating_point(r.tau);
  if (!r.reversed) return above;
  return {1.0 - above.p_f, 1.0 - above.p_m};
}

inline LocalRule rule_from_ratio(const GaussianShiftModel& model, double num, double den) {
  if (!(num * den > 0.0)) {
    throw infeasible_costs("threshold ratio is not positive (numerator " + std::to_string(num) +
                           ", denominator " + std::to_string(den) + ")");
  }
  LocalRule r;
  r.log_lr_threshold = std::log(num / den);
  r.reversed = den < 0.0;
  r.tau = model.threshold_for_log_lr(r.log_lr_threshold);
  return r;
}

// Threshold of one sensor given the other sensor's current rule.
inline LocalRule pbpo_update(const CostTensor2& costs, const RiskParams& priors, const GaussianShiftModel& model,
                             const LocalRule& other, MissWeighting weighting) {
  const OperatingPoint o = rule_point(model, other);
  const double p0_silent = 1.0 - o.p_f;  // P_0(phi_other = 0)
  const double p1_silent = o.p_m;        // P_1(phi_other = 0)
  const double miss_weight = weighting == MissWeighting::h0_density ? p0_silent : p1_silent;
  const double num = priors.pi0 * (costs.c_a() + costs.c_b() * p0_silent);
  const double den = priors.pi1() * (costs.c_c() + costs.c_d() * miss_weight);
  return rule_from_ratio(model, num, den);
}

}  // namespace detail

/// Solves the coupled two-sensor threshold conditions by alternating
/// updates, starting both sensors at the uncoupled threshold
/// pi0 C_a / (pi1 C_c). A run that hits the iteration cap comes back with
/// converged == false and the last iterate.
inline PbpoResult pbpo_thresholds(const CostTensor2& costs, const RiskParams& priors, const GaussianShiftModel& model,
                                  const PbpoOptions& opts = {}) {
  priors.validate();
  if (model.mu <= 0.0) throw std::domain_error("pbpo_thresholds needs a model with mu > 0");
  const CostTensor2 mirrored = costs.swapped();
  const LocalRule start = detail::rule_from_ratio(model, priors.pi0 * costs.c_a(), priors.pi1() * costs.c_c());

  PbpoResult r;
  r.sensor1 = start;
  r.sensor2 = start;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const LocalRule s1 = detail::pbpo_update(costs, priors, model, r.sensor2, opts.weighting);
    const LocalRule s2 = detail::pbpo_update(mirrored, priors, model, s1, opts.weighting);
    const double change = std::max(std::abs(s1.log_lr_threshold - r.sensor1.log_lr_threshold),
                                   std::abs(s2.log_lr_threshold - r.sensor2.log_lr_threshold));
    r.sensor1 = s1;
    r.sensor2 = s2;
    r.iterations = it;
    if (change < opts.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.point1 = detail::rule_point(model, r.sensor1);
  r.point2 = detail::rule_point(model, r.sensor2);
  return r;
}

struct Prop1Check {
  bool robust = false;
  OperatingPoint system{};
};

/// Majority vote over K (odd) identical sensors at `local`: the system is
/// balanced exactly when the local point is.
inline Prop1Check check_prop1(int K, const OperatingPoint& local) {
  detail::require_sensors(K);
  if (K % 2 == 0) throw std::invalid_argument("check_prop1 needs an odd sensor count");
  require_valid(local);
  const FusionRule rule = FusionRule::majority(K);
  Prop1Check out;
  out.system = {rule_false_alarm(rule, local.p_f), rule_miss(rule, local.p_m)};
  out.robust = std::abs(out.system.p_f - out.system.p_m) <= 1e-12;
  return out;
}

}  // namespace rfusion
