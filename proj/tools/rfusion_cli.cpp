// rfusion: tables and checks for robust decentralized detection.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rfusion/rfusion.hpp"
#include "table.hpp"

#ifndef RFUSION_VERSION
#define RFUSION_VERSION "0.0.0"
#endif

namespace rfusion::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct ThetaRange {
  std::optional<double> theta;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<double> step;

  void add_to(CLI::App* app) {
    app->add_option("--theta", theta, "single theta in (0, 1/2)");
    app->add_option("--from", from, "first theta of a sweep");
    app->add_option("--to", to, "last theta of a sweep");
    app->add_option("--step", step, "sweep step");
  }

  std::vector<double> values() const {
    if (theta) {
      if (from || to || step) throw usage_error("--theta cannot be combined with --from/--to/--step");
      check(*theta);
      return {*theta};
    }
    if (!from || !to || !step) throw usage_error("give --theta or all of --from, --to, --step");
    if (!(*step > 0.0)) throw usage_error("--step must be positive");
    if (!(*from <= *to)) throw usage_error("empty theta range: --from exceeds --to");
    check(*from);
    check(*to);
    const auto n = static_cast<std::int64_t>(std::floor((*to - *from) / *step + 1e-9)) + 1;
    std::vector<double> out;
    for (std::int64_t i = 0; i < n; ++i) out.push_back(*from + static_cast<double>(i) * *step);
    return out;
  }

  ordered_json json() const {
    ordered_json j = ordered_json::object();
    if (theta) j["theta"] = *theta;
    if (from) j["from"] = *from;
    if (to) j["to"] = *to;
    if (step) j["step"] = *step;
    return j;
  }

  static void check(double t) {
    if (!(t > 0.0 && t < 0.5)) throw usage_error("theta must lie in (0, 1/2), got " + format_number(t));
  }
};

void require_odd(int K) {
  if (K < 1) throw usage_error("--K must be at least 1");
  if (K % 2 == 0) throw usage_error("--K must be odd, got " + std::to_string(K));
}

/// What a subcommand produced: a table, optional extra JSON fields, and an exit status.
struct Result {
  Table table;
  ordered_json json_extra = ordered_json::object();
  std::optional<ordered_json> json_override;
  std::vector<std::string> extra_outputs;
  int status = kExitOk;
};

// ---------------------------------------------------------------------------

struct LossSingle {
  ThetaRange range;
  std::string curves;

  ordered_json params() const {
    ordered_json j = range.json();
    if (!curves.empty()) j["curves"] = curves;
    return j;
  }

  Result run() const {
    Result r;
    r.table.columns = {"row", "theta", "sup_loss", "prob_zero_loss", "butterfly_area"};
    for (double t : range.values()) {
      r.table.add({std::string("grid"), t, sup_single_loss(t), prob_zero_loss(t), butterfly_area(t)});
    }
    const SingleLossMaximum m = max_single_loss();
    r.table.add({std::string("max"), m.theta_star, m.loss_star, prob_zero_loss(m.theta_star),
                 butterfly_area(m.theta_star)});
    if (!curves.empty()) {
      write_curves(range.values());
      r.extra_outputs.push_back(curves);
    }
    return r;
  }

  // ROC-plane curves of the uncertainty region: l1, l2 and the minimax point.
  void write_curves(const std::vector<double>& thetas) const {
    std::ofstream os(curves, std::ios::binary);
    if (!os) throw usage_error("cannot open " + curves);
    Table t;
    t.columns = {"theta", "curve", "p_f", "p_m"};
    constexpr int kPoints = 100;
    for (double theta : thetas) {
      const ButterflyRegion region(theta);
      for (int i = 0; i <= kPoints; ++i) {
        const double pf = theta * i / kPoints;
        t.add({theta, std::string("l1"), pf, line_l1(region, pf)});
      }
      for (int i = 0; i <= kPoints; ++i) {
        const double pf = region.theta_hat() * i / kPoints;
        t.add({theta, std::string("l2"), pf, line_l2(region, pf)});
      }
      t.add({theta, std::string("minimax"), theta, theta});
    }
    t.write_csv(os);
  }
};

struct LossMulti {
  int K = 1;
  ThetaRange range;
  std::string x = "inf";

  ordered_json params() const {
    ordered_json j = {{"K", K}};
    j.update(range.json());
    j["x"] = x;
    return j;
  }

  Result run() const {
    require_odd(K);
    std::optional<double> fixed;
    if (x != "inf" && x != "optimize" && x != "minimize") {
      try {
        std::size_t used = 0;
        fixed = std::stod(x, &used);
        if (used != x.size()) throw std::invalid_argument(x);
      } catch (const std::exception&) {
        throw usage_error("--x must be a number >= 1, inf, optimize or minimize");
      }
      if (!(*fixed >= 1.0)) throw usage_error("--x must be >= 1");
    }
    Result r;
    r.table.columns = {"theta", "loss", "x_used"};
    for (double t : range.values()) {
      if (fixed) {
        r.table.add({t, multi_loss(K, t, *fixed), *fixed});
      } else if (x == "inf") {
        r.table.add({t, multi_loss_inf(K, t), std::numeric_limits<double>::infinity()});
      } else {
        const MultiLossExtremum e = x == "optimize" ? optimize_multi_loss_x(K, t) : minimize_multi_loss_x(K, t);
        r.table.add({t, e.loss, e.x});
      }
    }
    return r;
  }
};

struct WfGap {
  int K = 1;
  ThetaRange range;
  bool sup = false;
  bool equiv = false;

  ordered_json params() const {
    ordered_json j = {{"K", K}};
    j.update(range.json());
    j["sup"] = sup;
    j["equiv"] = equiv;
    return j;
  }

  Result run() const {
    require_odd(K);
    Result r;
    if (sup) {
      if (range.theta || range.from || range.to || range.step) throw usage_error("--sup sweeps theta itself");
      const WfLossSupremum s = sup_wf_loss(K);
      r.table.columns = {"K", "theta_star", "loss_star"};
      r.table.add({std::int64_t{K}, s.theta_star, s.loss_star});
      return r;
    }
    r.table.columns = {"theta", "wof_error", "wf_error", "loss", "best_k"};
    if (equiv) r.table.columns.push_back("equivalent_sensor_count");
    for (double t : range.values()) {
      const WfLossReport w = max_wf_loss(K, t);
      std::vector<Cell> row = {t, w.wof_error, w.wf_error, w.loss, std::int64_t{w.best_k}};
      if (equiv) row.push_back(std::int64_t{equivalent_sensor_count(K, t)});
      r.table.add(std::move(row));
    }
    return r;
  }
};

struct Simulate {
  double theta = 0.2;
  int K = 5;
  std::string system = "wof";
  int k = 0;
  std::uint64_t trials = 100000;
  int rounds = 0;
  std::optional<double> local_miss;

  ordered_json params() const {
    ordered_json j = {{"theta", theta}, {"K", K}, {"system", system}};
    if (system == "wf") j["k"] = k;
    j["trials"] = trials;
    j["rounds"] = rounds;
    if (local_miss) j["local_miss"] = *local_miss;
    return j;
  }

  Result run(std::uint64_t seed, unsigned threads) const {
    ThetaRange::check(theta);
    if (K < 1) throw usage_error("--K must be at least 1");
    if (trials == 0) throw usage_error("--trials must be positive");
    if (rounds < 0) throw usage_error("--rounds must be >= 0");
    const GaussianShiftModel model = model_from_theta(theta);
    NetworkConfig config = NetworkConfig::ring(K, trials, seed);
    config.rounds = rounds;
    config.threads = threads;
    if (local_miss) {
      if (!(*local_miss > 0.0 && *local_miss < 1.0)) throw usage_error("--local-miss must lie in (0, 1)");
      config.local_threshold = model.threshold_for_miss(*local_miss);
    }
    SystemSpec spec;
    if (system == "wof") {
      spec = SystemSpec::without_center();
    } else if (system == "wf") {
      if (k < 0 || k >= K) throw usage_error("--k must lie in [0, K-1]");
      spec = SystemSpec::with_center(FusionRule::counting(K, k));
    } else {
      throw usage_error("--system must be wof or wf");
    }

    const TrialStats s = estimate_errors(model, config, spec);
    const OperatingPoint exact = analytic_errors(model, config, spec);
    Result r;
    r.table.columns = {"quantity", "errors", "trials", "estimate", "stderr", "analytic", "z"};
    const auto row = [&](const char* name, std::uint64_t errors, std::uint64_t n, double est, double se, double a) {
      const double z = z_score(est, a, n);
      if (!(std::abs(z) <= 4.0)) r.status = kExitFailed;
      r.table.add({std::string(name), static_cast<std::int64_t>(errors), static_cast<std::int64_t>(n), est, se, a, z});
    };
    row("P_F", s.false_alarms, s.trials_h0, s.est_pf, s.stderr_pf, exact.p_f);
    row("P_M", s.misses, s.trials_h1, s.est_pm, s.stderr_pm, exact.p_m);
    r.json_extra["gossip_fallbacks"] = s.gossip_fallbacks;
    return r;
  }

  // z against the analytic binomial standard deviation.
  static double z_score(double est, double analytic, std::uint64_t n) {
    const double sd = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n));
    if (sd == 0.0) return est == analytic ? 0.0 : std::numeric_limits<double>::infinity();
    return (est - analytic) / sd;
  }
};

struct Verify {
  std::string suite = "all";

  ordered_json params() const { return {{"suite", suite}}; }

  Result run() const {
    if (!verify::is_suite(suite)) throw usage_error("unknown suite '" + suite + "'");
    Result r;
    r.table.columns = {"claim", "grid", "tolerance", "status", "detail"};
    ordered_json claims = ordered_json::object();
    for (const auto& c : verify::run_suite(suite)) {
      const std::string status = c.passed ? "pass" : "fail";
      if (!c.passed) r.status = kExitFailed;
      r.table.add({c.claim, c.grid, c.tolerance, status, c.detail});
      ordered_json entry = {{"grid", c.grid}, {"tolerance", cell_json(c.tolerance)}, {"status", status}};
      if (!c.passed) entry["detail"] = c.detail;
      claims[c.claim] = std::move(entry);
    }
    r.json_override = ordered_json{{"command", "verify"}, {"suite", suite}, {"claims", std::move(claims)}};
    return r;
  }
};

// ---------------------------------------------------------------------------

void emit(const Global& g, const std::string& command, const Result& r, std::ostream& os) {
  if (g.format == "csv") {
    r.table.write_csv(os);
    return;
  }
  ordered_json doc;
  if (r.json_override) {
    doc = *r.json_override;
  } else {
    doc["command"] = command;
    doc["columns"] = r.table.columns;
    doc["rows"] = r.table.rows_json();
    for (const auto& [key, value] : r.json_extra.items()) doc[key] = value;
  }
  os << doc.dump(2) << "\n";
}

void write_manifest(const Global& g, const std::string& command, const ordered_json& params,
                    const std::optional<std::uint64_t>& seed, const std::vector<std::string>& outputs,
                    double seconds, const std::vector<std::string>& argv) {
  ordered_json m;
  m["subcommand"] = command;
  m["parameters"] = params;
  m["format"] = g.format;
  m["threads"] = g.threads;
  m["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  m["version"] = RFUSION_VERSION;
  m["outputs"] = outputs;
  m["argv"] = argv;
  m["duration_seconds"] = seconds;
  if (g.out.empty()) {
    std::cerr << m.dump(2) << "\n";
    return;
  }
  std::ofstream os(g.out + ".manifest.json", std::ios::binary);
  if (!os) throw usage_error("cannot write manifest next to " + g.out);
  os << m.dump(2) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Tables and numerical checks for robust decentralized detection"};
  app.set_version_flag("--version", RFUSION_VERSION);
  app.set_config("--config", "", "key=value file; subcommand keys take a 'subcommand.' prefix");
  app.require_subcommand(1);

  Global g;
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "simulation seed");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");

  LossSingle ls;
  auto* c_ls = app.add_subcommand("loss-single", "single-sensor loss over theta");
  ls.range.add_to(c_ls);
  c_ls->add_option("--curves", ls.curves, "also write ROC-plane curves (CSV) to this path");

  LossMulti lm;
  auto* c_lm = app.add_subcommand("loss-multi", "multi-sensor loss of the majority network over theta");
  c_lm->add_option("--K", lm.K, "odd sensor count")->required();
  lm.range.add_to(c_lm);
  c_lm->add_option("--x", lm.x, "number >= 1, inf, optimize or minimize");

  WfGap wg;
  auto* c_wg = app.add_subcommand("wf-gap", "gain of a fusion center over majority vote");
  c_wg->add_option("--K", wg.K, "odd sensor count")->required();
  wg.range.add_to(c_wg);
  c_wg->add_flag("--sup", wg.sup, "maximize the gain over theta");
  c_wg->add_flag("--equiv", wg.equiv, "add the equivalent fusion-center sensor count");

  Simulate sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo error rates of a ring network");
  c_sim->add_option("--theta", sim.theta, "minimax local error of the Gaussian shift model");
  c_sim->add_option("--K", sim.K, "sensor count");
  c_sim->add_option("--system", sim.system, "wof (gossip majority) or wf (fusion center)");
  c_sim->add_option("--k", sim.k, "fusion-center counting threshold");
  c_sim->add_option("--trials", sim.trials, "trials per hypothesis");
  c_sim->add_option("--rounds", sim.rounds, "gossip round budget (0: K)");
  c_sim->add_option("--local-miss", sim.local_miss, "set local thresholds to this miss probability");

  Verify ver;
  auto* c_ver = app.add_subcommand("verify", "run the numerical claim suites");
  c_ver->add_option("--suite", ver.suite, "props, theorem1, prop2, pbpo or all");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (g.threads == 0) g.threads = std::max(1u, std::thread::hardware_concurrency());
  const std::vector<std::string> args(argv, argv + argc);
  const auto start = std::chrono::steady_clock::now();
  try {
    std::string command;
    ordered_json params;
    std::optional<std::uint64_t> seed;
    Result result;
    if (c_ls->parsed()) {
      command = "loss-single";
      params = ls.params();
      result = ls.run();
    } else if (c_lm->parsed()) {
      command = "loss-multi";
      params = lm.params();
      result = lm.run();
    } else if (c_wg->parsed()) {
      command = "wf-gap";
      params = wg.params();
      result = wg.run();
    } else if (c_sim->parsed()) {
      command = "simulate";
      params = sim.params();
      seed = g.seed ? *g.seed : std::uint64_t{std::random_device{}()} << 32 | std::random_device{}();
      result = sim.run(*seed, g.threads);
    } else {
      command = "verify";
      params = ver.params();
      result = ver.run();
    }

    std::vector<std::string> outputs;
    if (g.out.empty()) {
      emit(g, command, result, std::cout);
      outputs.push_back("-");
    } else {
      std::ofstream os(g.out, std::ios::binary);
      if (!os) throw usage_error("cannot open " + g.out);
      emit(g, command, result, os);
      outputs.push_back(g.out);
    }
    outputs.insert(outputs.end(), result.extra_outputs.begin(), result.extra_outputs.end());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(g, command, params, seed, outputs, seconds, args);
    return result.status;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace
}  // namespace rfusion::cli

int main(int argc, char** argv) { return rfusion::cli::run(argc, argv); }
