// itrust command-line driver: solve, verify-bounds, rate-fit,
// compare-oracles, list-problems.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 numerical or capability error.

#include "itrust/experiments.hpp"
#include "itrust/objectives.hpp"
#include "itrust/rate_fit.hpp"
#include "itrust/trace_io.hpp"
#include "itrust/trust_region.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

using namespace itrust;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  std::string seeds = "1-20";
  std::string out;
  std::string format = "csv";

  std::string problem;
  std::string solver = "ecim";
  std::size_t T = 100;
  std::vector<std::size_t> K;
  double beta0 = 1.0;
  double power = 1.0;
  double sigma2 = 0.0;
  std::string schedule = "inverse-lipschitz";
  double delta0 = 1.0;
  double delta_max = 100.0;
  double gtol = 1e-8;
  bool scaled = false;
  bool warm_start = false;

  std::string check;
  std::string mode = "fixed-horizon";
  Eigen::Index n = 2;
  double epsilon = 1e-6;
};

// "1-20" (inclusive range), "3,5,9" (list) or "N" (seeds 1..N).
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    if (const auto dash = text.find('-'); dash != std::string::npos) {
      const std::uint64_t lo = std::stoull(text.substr(0, dash));
      const std::uint64_t hi = std::stoull(text.substr(dash + 1));
      if (hi < lo) throw UsageError("--seeds: empty range " + text);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (text.find(',') != std::string::npos) {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        seeds.push_back(std::stoull(text.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    } else {
      const std::uint64_t count = std::stoull(text);
      for (std::uint64_t s = 1; s <= count; ++s) seeds.push_back(s);
    }
  } catch (const std::logic_error&) {
    throw UsageError("--seeds: cannot parse '" + text + "'");
  }
  if (seeds.empty()) throw UsageError("--seeds: no seeds given");
  return seeds;
}

StepSchedule parse_schedule(const Options& o) {
  if (o.schedule == "fixed") return StepSchedule::fixed(o.beta0);
  if (o.schedule == "fixed-horizon") return StepSchedule::fixed_horizon(o.beta0);
  if (o.schedule == "decreasing") return StepSchedule::decreasing(o.beta0, o.power);
  if (o.schedule == "inverse-lipschitz") return StepSchedule::inverse_lipschitz(o.beta0);
  throw UsageError("--schedule: unknown schedule " + o.schedule);
}

SubproblemSolverKind parse_solver(const std::string& name) {
  if (name == "ecim") return SubproblemSolverKind::Ecim;
  if (name == "exact-ball") return SubproblemSolverKind::ExactBall;
  if (name == "grid") return SubproblemSolverKind::GridOracle;
  throw UsageError("--solver: unknown solver " + name);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Params = std::map<std::string, std::string>;

std::string canonical(const std::string& command, const Params& params) {
  std::string s = command;
  for (const auto& [k, v] : params) s += ";" + k + "=" + v;
  return s;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Writes to --out, or stdout when it is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("--out: cannot open " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool to_stdout() const { return !file_.is_open(); }

 private:
  std::ofstream file_;
};

void write_report(const Options& o, const std::string& command, const Params& params,
                  const json& rows, const json& summary, const std::string& csv) {
  Sink sink(o.out);
  if (o.format == "json") {
    json report;
    report["command"] = command;
    report["config"] = params;
    report["config_hash"] = config_hash(canonical(command, params));
    report["timestamp"] = utc_timestamp();
    report["rows"] = rows;
    report["summary"] = summary;
    sink.stream() << report.dump(2) << "\n";
  } else {
    sink.stream() << csv;
  }
}

// ---------------------------------------------------------------- commands

int cmd_list_problems() {
  for (const TestProblem& p : problem_suite()) {
    fmt::print("{:<22} n={:<3} {}{}\n", p.name, p.objective.dim, to_string(p.convexity),
               p.scaling ? " (scaling available)" : "");
  }
  return kOk;
}

int cmd_solve(const Options& o) {
  const std::optional<TestProblem> problem = find_problem(o.problem);
  if (!problem) throw UsageError("unknown problem '" + o.problem + "' (see list-problems)");

  TrustRegionConfig config;
  config.delta0 = o.delta0;
  config.delta_max = o.delta_max;
  config.iterations = o.T;
  config.gtol = o.gtol;
  config.seed = o.seed;
  config.solver.kind = parse_solver(o.solver);
  config.solver.ecim.schedule = parse_schedule(o);
  config.solver.ecim.sigma2 = o.sigma2;
  config.solver.ecim.iterations = o.K.empty() ? 5000 : o.K.front();
  config.solver.warm_start = o.warm_start;
  if (o.scaled) {
    if (!problem->scaling) throw UsageError("--scaled: problem has no scaling diagonal");
    config.scaling = problem->scaling;
  }
  try {
    config.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }

  const TrustRegionTrace trace = itrust::itrust(problem->objective, config, problem->start);
  const double eig = min_hessian_eigenvalue(problem->objective, trace.final_theta);

  const Params params = {{"problem", o.problem},
                         {"solver", o.solver},
                         {"seed", std::to_string(o.seed)},
                         {"T", std::to_string(o.T)},
                         {"K", std::to_string(config.solver.ecim.iterations)},
                         {"beta0", format_real(o.beta0)},
                         {"power", format_real(o.power)},
                         {"sigma2", format_real(o.sigma2)},
                         {"schedule", o.schedule},
                         {"delta0", format_real(o.delta0)},
                         {"delta_max", format_real(o.delta_max)},
                         {"gtol", format_real(o.gtol)},
                         {"scaled", o.scaled ? "1" : "0"},
                         {"warm_start", o.warm_start ? "1" : "0"}};

  json summary;
  summary["theta"] = to_json(trace.final_theta);
  summary["f"] = trace.final_f;
  summary["grad_norm"] = trace.final_grad_norm;
  summary["min_hessian_eigenvalue"] = eig;
  summary["iterations"] = trace.records.size();
  summary["accepted_steps"] = trace.accepted_steps;
  summary["converged"] = trace.converged;

  std::ostream* summary_out = &std::cout;
  if (!o.out.empty()) {
    Sink sink(o.out);
    if (o.format == "json") {
      json report = trust_region_json(trace);
      report["command"] = "solve";
      report["config"] = params;
      report["config_hash"] = config_hash(canonical("solve", params));
      report["seed"] = o.seed;
      report["timestamp"] = utc_timestamp();
      report["summary"] = summary;
      sink.stream() << report.dump(2) << "\n";
    } else {
      write_trust_region_csv(trace, sink.stream());
    }
    if (sink.to_stdout()) summary_out = &std::cerr;
  }

  std::ostream& s = *summary_out;
  s << "problem: " << o.problem << "\n";
  s << "solver: " << o.solver << "\n";
  s << "iterations: " << trace.records.size() << " (accepted " << trace.accepted_steps << ")\n";
  s << "converged: " << (trace.converged ? "yes" : "no") << "\n";
  s << "f: " << format_real(trace.final_f) << "\n";
  s << "grad_norm: " << format_real(trace.final_grad_norm) << "\n";
  s << "min_hessian_eigenvalue: " << format_real(eig) << "\n";
  s << "theta:";
  for (Eigen::Index i = 0; i < trace.final_theta.size(); ++i) {
    s << " " << format_real(trace.final_theta[i]);
  }
  s << "\n";
  if (problem->objective.optimum) {
    s << "distance_to_optimum: "
      << format_real((trace.final_theta - problem->objective.optimum->theta).norm()) << "\n";
  }
  return kOk;
}

std::vector<std::size_t> default_horizons(BoundCheck check) {
  switch (check) {
    case BoundCheck::Theorem1: return {10, 100, 1000, 10000};
    case BoundCheck::Corollary1: return {10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
    case BoundCheck::Theorem2: return {100, 100000};
    case BoundCheck::Theorem3: return {0, 1, 5, 10, 20, 50, 100, 200, 500, 1000, 2000};
    case BoundCheck::Conjecture1: return {2000};
  }
  return {};
}

int cmd_verify_bounds(const Options& o) {
  const std::optional<BoundCheck> check = parse_bound_check(o.check);
  if (!check) throw UsageError("--check: unknown check '" + o.check + "'");
  CampaignOptions opt;
  opt.seeds = parse_seeds(o.seeds);
  opt.horizons = o.K.empty() ? default_horizons(*check) : o.K;
  opt.n = o.n;
  opt.beta0 = o.beta0;
  opt.decreasing_power = o.power;
  opt.epsilon = o.epsilon;
  if (!(opt.beta0 > 0.0)) throw UsageError("--beta0 must be positive");
  if (!(opt.decreasing_power > 0.5 && opt.decreasing_power <= 1.0)) {
    throw UsageError("--power must lie in (0.5, 1]");
  }

  const std::vector<BoundRow> rows = run_bound_campaign(*check, opt);
  const CampaignSummary summary = summarize(rows);

  const Params params = {{"check", o.check},
                         {"seeds", o.seeds},
                         {"K", join(opt.horizons)},
                         {"n", std::to_string(opt.n)},
                         {"beta0", format_real(opt.beta0)},
                         {"power", format_real(opt.decreasing_power)},
                         {"epsilon", format_real(opt.epsilon)}};
  const std::string hash = config_hash(canonical("verify-bounds", params));

  json jrows = json::array();
  std::string csv = "check,family,seed,K,beta,gap,bound,satisfied,dist0,G,L,mu,mu_p,config_hash\n";
  for (const auto& r : rows) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.check, r.family, r.seed,
                       r.horizon, format_real(r.beta), format_real(r.gap), format_real(r.bound),
                       r.satisfied ? 1 : 0, format_real(r.dist0), format_real(r.G),
                       format_real(r.L), format_real(r.mu), format_real(r.mu_p), hash);
    json j = {{"check", r.check},   {"family", r.family},       {"seed", r.seed},
              {"K", r.horizon},     {"beta", r.beta},           {"gap", r.gap},
              {"bound", r.bound},   {"satisfied", r.satisfied}, {"dist0", r.dist0},
              {"G", r.G},           {"L", r.L},                 {"mu", r.mu},
              {"mu_p", r.mu_p},     {"config_hash", hash}};
    jrows.push_back(j);
  }
  const json jsummary = {{"rows", summary.rows},
                         {"passed", summary.passed},
                         {"pass_rate", summary.pass_rate()}};
  write_report(o, "verify-bounds", params, jrows, jsummary, csv);
  fmt::print(stderr, "{}: {}/{} rows satisfied\n", o.check, summary.passed, summary.rows);
  return summary.passed == summary.rows ? kOk : kVerifyFailed;
}

struct FitRow {
  std::string scope;
  std::uint64_t seed = 0;
  RateFit fit;
  bool satisfied = false;
};

int cmd_rate_fit(const Options& o) {
  const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds);
  std::vector<FitRow> fits;
  bool pass = true;

  if (o.mode == "fixed-horizon") {
    CampaignOptions opt;
    opt.seeds = seeds;
    opt.horizons = o.K.empty() ? default_horizons(BoundCheck::Corollary1) : o.K;
    const auto rows = run_bound_campaign(BoundCheck::Corollary1, opt);
    const std::vector<double> ks(opt.horizons.begin(), opt.horizons.end());
    auto in_range = [](const RateFit& f) { return f.slope >= -0.7 && f.slope <= -0.4; };
    const RateFit envelope = fit_log_log(ks, gap_envelope(rows, opt.horizons));
    fits.push_back({"envelope", 0, envelope, in_range(envelope)});
    pass = in_range(envelope);
    for (std::uint64_t seed : seeds) {
      std::vector<double> gaps;
      for (const auto& r : rows) {
        if (r.seed == seed) gaps.push_back(r.gap);
      }
      try {
        const RateFit f = fit_log_log(ks, gaps);
        fits.push_back({"instance", seed, f, in_range(f)});
      } catch (const InsufficientDataError&) {
        fits.push_back({"instance", seed, RateFit{}, false});
      }
    }
  } else if (o.mode == "linear") {
    const std::size_t horizon = o.K.empty() ? 2000 : o.K.front();
    std::size_t usable = 0;
    for (std::uint64_t seed : seeds) {
      const LinearRateSeries series = pl_gap_series(pl_qp_instance(o.n, seed), horizon);
      try {
        const RateFit f = fit_log_linear(series.horizons, series.gaps);
        const bool ok = f.slope < 0.0 && f.r2 >= 0.95;
        fits.push_back({"instance", seed, f, ok});
        pass = pass && ok;
        ++usable;
      } catch (const InsufficientDataError&) {
        // converged below the floor in under four steps
        fits.push_back({"insufficient", seed, RateFit{0.0, 0.0, 0.0, series.gaps.size()}, false});
      }
    }
    if (usable == 0) throw InsufficientDataError("rate fit: no instance has enough points");
  } else if (o.mode == "control") {
    // gap of the starting point at every K; no solver steps are taken
    const std::vector<std::size_t> horizons = o.K.empty() ? default_horizons(BoundCheck::Corollary1) : o.K;
    const std::vector<double> ks(horizons.begin(), horizons.end());
    for (std::uint64_t seed : seeds) {
      const BoxQpInstance inst = convex_qp_instance(o.n, seed);
      const double gap = energy(inst.model, inst.s0) - reference_optimum(inst.model).e_star;
      const RateFit f = fit_log_log(ks, std::vector<double>(ks.size(), gap));
      const bool ok = std::abs(f.slope) < 1e-12;
      fits.push_back({"instance", seed, f, ok});
      pass = pass && ok;
    }
  } else {
    throw UsageError("--mode: expected fixed-horizon, linear or control");
  }

  const Params params = {{"mode", o.mode},
                         {"seeds", o.seeds},
                         {"K", join(o.K)},
                         {"n", std::to_string(o.n)}};
  const std::string hash = config_hash(canonical("rate-fit", params));
  json jrows = json::array();
  std::string csv = "mode,scope,seed,slope,intercept,r2,points,satisfied,config_hash\n";
  for (const auto& f : fits) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", o.mode, f.scope, f.seed,
                       format_real(f.fit.slope), format_real(f.fit.intercept),
                       format_real(f.fit.r2), f.fit.points, f.satisfied ? 1 : 0, hash);
    jrows.push_back({{"mode", o.mode},
                     {"scope", f.scope},
                     {"seed", f.seed},
                     {"slope", f.fit.slope},
                     {"intercept", f.fit.intercept},
                     {"r2", f.fit.r2},
                     {"points", f.fit.points},
                     {"satisfied", f.satisfied},
                     {"config_hash", hash}});
  }
  write_report(o, "rate-fit", params, jrows, {{"pass", pass}}, csv);
  if (o.mode == "fixed-horizon") {
    fmt::print(stderr, "envelope slope {:.4f} (r2 {:.4f}): {}\n", fits.front().fit.slope,
               fits.front().fit.r2, pass ? "within [-0.7, -0.4]" : "outside [-0.7, -0.4]");
  } else {
    fmt::print(stderr, "{}: {}\n", o.mode, pass ? "all fits satisfied" : "some fits failed");
  }
  return pass ? kOk : kVerifyFailed;
}

int cmd_compare_oracles(const Options& o) {
  EcimConfig ecim;
  ecim.schedule = parse_schedule(o);
  ecim.sigma2 = o.sigma2;
  ecim.iterations = o.K.empty() ? 50000 : o.K.front();
  try {
    ecim.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto results = oracle_campaign(parse_seeds(o.seeds), ecim);

  const Params params = {{"seeds", o.seeds},
                         {"K", std::to_string(ecim.iterations)},
                         {"schedule", o.schedule},
                         {"beta0", format_real(o.beta0)},
                         {"power", format_real(o.power)},
                         {"sigma2", format_real(o.sigma2)}};
  const std::string hash = config_hash(canonical("compare-oracles", params));
  json jrows = json::array();
  std::string csv =
      "seed,n,delta,ecim_value,ball_value,grid_value,c,ball_dominance,grid_agreement,"
      "unification,config_hash\n";
  std::size_t passed = 0;
  for (const auto& r : results) {
    const bool ok = r.ball_dominance && r.grid_agreement && r.unification;
    passed += ok;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.n, format_real(r.delta),
                       format_real(r.ecim_value), format_real(r.ball_value),
                       format_real(r.grid_value), format_real(r.unification_c),
                       r.ball_dominance ? 1 : 0, r.grid_agreement ? 1 : 0, r.unification ? 1 : 0,
                       hash);
    jrows.push_back({{"seed", r.seed},
                     {"n", r.n},
                     {"delta", r.delta},
                     {"ecim_value", r.ecim_value},
                     {"ball_value", r.ball_value},
                     {"grid_value", r.grid_value},
                     {"c", r.unification_c},
                     {"ball_dominance", r.ball_dominance},
                     {"grid_agreement", r.grid_agreement},
                     {"unification", r.unification},
                     {"config_hash", hash}});
  }
  write_report(o, "compare-oracles", params, jrows,
               {{"rows", results.size()}, {"passed", passed}}, csv);
  fmt::print(stderr, "compare-oracles: {}/{} subproblems pass all checks\n", passed,
             results.size());
  return passed == results.size() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-region optimization with an Ising-machine subproblem solver"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  app.option_defaults()->always_capture_default();

  Options o;
  app.add_option("--seed", o.seed, "Seed for solve");
  app.add_option("--seeds", o.seeds, "Seeds: 1-20, 3,5,9 or N (= 1..N)");
  app.add_option("--out", o.out, "Output file ('-' or empty for stdout)");
  app.add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--K", o.K, "ECIM iterations; a comma list for campaigns")->delimiter(',');
  app.add_option("--beta0", o.beta0, "Step-size scale");
  app.add_option("--power", o.power, "Exponent of the decreasing schedule, in (0.5, 1]");
  app.add_option("--sigma2", o.sigma2, "ECIM noise variance");
  app.add_option("--schedule", o.schedule, "ECIM step schedule")
      ->check(CLI::IsMember({"fixed", "fixed-horizon", "decreasing", "inverse-lipschitz"}));
  app.add_option("--n", o.n, "Instance dimension for campaigns (1..3)");

  auto* list = app.add_subcommand("list-problems", "List the built-in test problems");

  auto* solve = app.add_subcommand("solve", "Run the trust-region method on a suite problem");
  solve->add_option("--problem", o.problem, "Problem name")->required();
  solve->add_option("--solver", o.solver, "Subproblem solver")
      ->check(CLI::IsMember({"ecim", "exact-ball", "grid"}));
  solve->add_option("--T", o.T, "Outer iterations");
  solve->add_option("--delta0", o.delta0, "Initial radius");
  solve->add_option("--delta-max", o.delta_max, "Maximum radius");
  solve->add_option("--gtol", o.gtol, "Gradient-norm stopping tolerance (0 disables)");
  solve->add_flag("--scaled", o.scaled, "Use the problem's elliptical scaling");
  solve->add_flag("--warm-start", o.warm_start, "Start each ECIM run from the previous step");

  auto* verify = app.add_subcommand("verify-bounds", "Check a convergence bound over seeds");
  verify->add_option("--check", o.check, "theorem1, corollary1, theorem2, theorem3, conjecture1")
      ->required();
  verify->add_option("--epsilon", o.epsilon, "Target accuracy for the iteration-count check");

  auto* rate = app.add_subcommand("rate-fit", "Fit convergence rates");
  rate->add_option("--mode", o.mode, "fixed-horizon, linear or control");

  auto* compare = app.add_subcommand("compare-oracles", "ECIM vs exact ball vs grid oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (list->parsed()) return cmd_list_problems();
    if (solve->parsed()) return cmd_solve(o);
    if (verify->parsed()) return cmd_verify_bounds(o);
    if (rate->parsed()) return cmd_rate_fit(o);
    if (compare->parsed()) return cmd_compare_oracles(o);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const ArgumentError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return kNumerical;
  }
  return kUsage;
}
