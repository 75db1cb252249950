#include "itrust/experiments.hpp"

#include "itrust/objectives.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace itrust {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFamilyDelta = 0.5;
constexpr Eigen::Index kMaxReferenceDim = 3;

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(engine);
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

Matrix spectral(const Matrix& q, const Vector& lambdas) {
  Matrix s = q * lambdas.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

std::size_t max_horizon(const std::vector<std::size_t>& horizons) {
  return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

BoundRow base_row(BoundCheck check, const BoxQpInstance& inst, const ReferenceOptimum& ref,
                  const ConstantEstimates& consts) {
  BoundRow row;
  row.check = to_string(check);
  row.family = inst.family;
  row.seed = inst.seed;
  row.dist0 = (inst.s0 - ref.s_star).norm();
  row.G = consts.G;
  row.L = consts.L;
  row.mu = consts.mu.value_or(kNaN);
  row.mu_p = kNaN;
  return row;
}

std::vector<BoundRow> theorem1_rows(const BoxQpInstance& inst, const CampaignOptions& opt) {
  const ReferenceOptimum ref = reference_optimum(inst.model);
  const ConstantEstimates consts = estimate_constants(inst.model);
  const double beta = opt.beta0 / consts.L;
  EcimConfig config{StepSchedule::fixed(beta), 0.0, max_horizon(opt.horizons), inst.seed, false};
  const EcimTrace trace = run_ecim(inst.model, config, inst.s0);
  const std::vector<double> best = trace.best_energy_history();

  std::vector<BoundRow> rows;
  for (std::size_t k : opt.horizons) {
    BoundRow row = base_row(BoundCheck::Theorem1, inst, ref, consts);
    row.horizon = k;
    row.beta = beta;
    row.gap = best[k] - ref.e_star;
    row.bound = k == 0 ? kInf
                       : 0.5 * (row.dist0 * row.dist0 / (beta * static_cast<double>(k)) +
                                beta * consts.G * consts.G);
    row.satisfied = row.gap <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BoundRow> corollary1_rows(const BoxQpInstance& inst, const CampaignOptions& opt) {
  const ReferenceOptimum ref = reference_optimum(inst.model);
  const ConstantEstimates consts = estimate_constants(inst.model);
  const double dist0 = (inst.s0 - ref.s_star).norm();
  const double beta0 = std::max(dist0, 1e-12) / consts.G;

  std::vector<BoundRow> rows;
  for (std::size_t k : opt.horizons) {
    EcimConfig config{StepSchedule::fixed_horizon(beta0), 0.0, k, inst.seed, false};
    const EcimTrace trace = run_ecim(inst.model, config, inst.s0);
    BoundRow row = base_row(BoundCheck::Corollary1, inst, ref, consts);
    row.horizon = k;
    row.beta = step_size(config.schedule, 0, k);
    row.gap = trace.best_energy - ref.e_star;
    row.bound = k == 0 ? kInf : dist0 * consts.G / std::sqrt(static_cast<double>(k));
    row.satisfied = row.gap <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BoundRow> theorem2_rows(const BoxQpInstance& inst, const CampaignOptions& opt) {
  const ReferenceOptimum ref = reference_optimum(inst.model);
  const ConstantEstimates consts = estimate_constants(inst.model);
  const StepSchedule schedule = StepSchedule::decreasing(opt.beta0 / consts.L, opt.decreasing_power);
  EcimConfig config{schedule, 0.0, max_horizon(opt.horizons), inst.seed, false};
  const EcimTrace trace = run_ecim(inst.model, config, inst.s0);

  std::vector<std::size_t> horizons = opt.horizons;
  std::sort(horizons.begin(), horizons.end());
  std::vector<BoundRow> rows;
  Vector weighted = Vector::Zero(inst.model.dim());
  double sum = 0.0, sum_sq = 0.0;
  std::size_t k = 0;
  for (std::size_t horizon : horizons) {
    for (; k < horizon; ++k) {
      weighted += trace.betas[k] * trace.iterates[k];
      sum += trace.betas[k];
      sum_sq += trace.betas[k] * trace.betas[k];
    }
    const Vector averaged = sum > 0.0 ? Vector(weighted / sum) : inst.s0;
    BoundRow row = base_row(BoundCheck::Theorem2, inst, ref, consts);
    row.horizon = horizon;
    row.beta = schedule.value;
    row.gap = energy(inst.model, averaged) - ref.e_star;
    row.bound = sum > 0.0 ? (row.dist0 * row.dist0 + consts.G * consts.G * sum_sq) / (2.0 * sum)
                          : kInf;
    row.satisfied = row.gap <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BoundRow> theorem3_rows(const BoxQpInstance& inst, const CampaignOptions& opt) {
  const ReferenceOptimum ref = reference_optimum(inst.model);
  const ConstantEstimates consts = estimate_constants(inst.model);
  const double beta = 1.0 / consts.L;
  EcimConfig config{StepSchedule::fixed(beta), 0.0, max_horizon(opt.horizons), inst.seed, false};
  const EcimTrace trace = run_ecim(inst.model, config, inst.s0);
  const std::optional<double> mu_p = estimate_mu_p(trace, ref.e_star);
  const double gap0 = trace.energies[0] - ref.e_star;
  const double rate = mu_p ? 1.0 - beta * *mu_p : kNaN;

  // First k at which the per-iterate bound fails above the floor.
  std::size_t first_violation = trace.energies.size();
  std::optional<std::size_t> reached;
  for (std::size_t k = 0; k < trace.energies.size(); ++k) {
    const double gap = trace.energies[k] - ref.e_star;
    const double bound = std::pow(rate, static_cast<double>(k)) * gap0;
    if (!(gap <= bound) && gap >= opt.gap_floor && first_violation == trace.energies.size()) {
      first_violation = k;
    }
    if (!reached && gap <= opt.epsilon) reached = k;
  }

  std::vector<BoundRow> rows;
  for (std::size_t k : opt.horizons) {
    BoundRow row = base_row(BoundCheck::Theorem3, inst, ref, consts);
    row.horizon = k;
    row.beta = beta;
    row.mu_p = mu_p.value_or(kNaN);
    row.gap = trace.energies[k] - ref.e_star;
    row.bound = std::pow(rate, static_cast<double>(k)) * gap0;
    row.satisfied = mu_p.has_value() && first_violation > k &&
                    (row.gap <= row.bound || row.gap < opt.gap_floor);
    rows.push_back(row);
  }

  BoundRow iters = base_row(BoundCheck::Theorem3, inst, ref, consts);
  iters.check = "theorem3-iterations";
  iters.beta = beta;
  iters.mu_p = mu_p.value_or(kNaN);
  iters.horizon = reached.value_or(trace.energies.size());
  iters.gap = static_cast<double>(iters.horizon);
  iters.bound = mu_p ? std::max(0.0, consts.L / *mu_p * std::log(gap0 / opt.epsilon)) : kNaN;
  iters.satisfied = reached.has_value() && iters.gap <= 1.1 * iters.bound + 0.0;
  if (reached && *reached == 0) iters.satisfied = true;
  rows.push_back(iters);
  return rows;
}

std::vector<BoundRow> conjecture1_rows(const BoxQpInstance& inst, const CampaignOptions& opt) {
  const ReferenceOptimum ref = reference_optimum(inst.model);
  const ConstantEstimates consts = estimate_constants(inst.model);
  const double beta = 1.0 / consts.L;
  const std::size_t horizon = std::max<std::size_t>(max_horizon(opt.horizons), 1);
  EcimConfig config{StepSchedule::fixed(beta), 0.0, horizon, inst.seed, false};
  const EcimTrace trace = run_ecim(inst.model, config, inst.s0);
  const std::optional<double> mu_p = estimate_mu_p(trace, ref.e_star);

  BoundRow row = base_row(BoundCheck::Conjecture1, inst, ref, consts);
  row.horizon = horizon;
  row.beta = beta;
  row.mu_p = mu_p.value_or(kNaN);
  row.gap = row.mu_p;
  row.bound = consts.mu ? *consts.mu + 1e-9 : kNaN;
  row.satisfied = mu_p.has_value() && consts.mu.has_value() && *mu_p > 0.0 && *mu_p <= row.bound;
  return {row};
}

// Runs body(i) for every index in parallel; rethrows the first failure.
template <class Body>
void parallel_cells(std::size_t count, Body body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

BoxQpInstance convex_qp_instance(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> eig(0.0, 2.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Matrix q = random_orthogonal(n, engine);
  Vector lambdas(n);
  for (Eigen::Index i = 0; i < n; ++i) lambdas[i] = eig(engine);
  Matrix skew(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) skew(i, j) = 0.3 * unit(engine);
  skew = skew - skew.transpose();
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = unit(engine);
  Vector s0 = random_box_point(n, kFamilyDelta, engine);
  return {"convex-qp", seed, QuadraticModel(spectral(q, lambdas) + skew, h, kFamilyDelta),
          std::move(s0)};
}

BoxQpInstance pl_qp_instance(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> eig(0.5, 2.0);
  const Matrix q = random_orthogonal(n, engine);
  Vector lambdas(n);
  for (Eigen::Index i = 0; i < n; ++i) lambdas[i] = eig(engine);
  const Matrix s = spectral(q, lambdas);
  const Vector centre = random_box_point(n, 0.8 * kFamilyDelta, engine);
  Vector s0 = random_box_point(n, kFamilyDelta, engine);
  return {"pl-qp", seed, QuadraticModel(s, -s * centre, kFamilyDelta), std::move(s0)};
}

BoxQpInstance singular_qp_instance(std::uint64_t seed, std::size_t stratum, std::size_t strata) {
  if (strata == 0 || stratum >= strata) throw ArgumentError("singular_qp_instance: bad stratum");
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index n = 3;
  const Matrix q = random_orthogonal(n, engine);
  const double position = (static_cast<double>(stratum) + unit(engine)) / static_cast<double>(strata);
  Vector lambdas(n);
  lambdas << 1.0, std::pow(10.0, -4.0 + 3.5 * position), 0.0;
  const Matrix s = spectral(q, lambdas);
  const Vector centre = random_box_point(n, 0.4 * kFamilyDelta, engine);
  Vector s0 = random_box_point(n, kFamilyDelta, engine);
  return {"singular-qp", seed, QuadraticModel(s, -s * centre, kFamilyDelta), std::move(s0)};
}

BoxQpInstance random_subproblem_instance(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.2, 1.0);
  Matrix b(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = normal(engine);
  Matrix s = b * b.transpose() / static_cast<double>(n);
  s = 0.5 * (s + s.transpose());
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = normal(engine);
  const double delta = radius(engine);
  Vector s0 = random_box_point(n, delta, engine);
  return {"subproblem", seed, QuadraticModel(s, h, delta), std::move(s0)};
}

ReferenceOptimum reference_optimum(const QuadraticModel& model) {
  if (model.dim() > kMaxReferenceDim) {
    throw CapabilityError("reference optimum: grid oracle restricted to n <= 3");
  }
  GridOptions options;
  options.resolution = model.dim() <= 2 ? 1e-3 : 1e-2;
  options.polish_steps = 300000;
  options.polish_tol = 1e-15;
  const OracleSolution sol = grid_minimize_box(model, options);
  return {sol.s_star, sol.value, sol.resolution};
}

const char* to_string(BoundCheck check) {
  switch (check) {
    case BoundCheck::Theorem1: return "theorem1";
    case BoundCheck::Corollary1: return "corollary1";
    case BoundCheck::Theorem2: return "theorem2";
    case BoundCheck::Theorem3: return "theorem3";
    case BoundCheck::Conjecture1: return "conjecture1";
  }
  return "unknown";
}

std::optional<BoundCheck> parse_bound_check(const std::string& name) {
  for (BoundCheck c : {BoundCheck::Theorem1, BoundCheck::Corollary1, BoundCheck::Theorem2,
                       BoundCheck::Theorem3, BoundCheck::Conjecture1}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

std::vector<BoundRow> run_bound_campaign(BoundCheck check, const CampaignOptions& options) {
  if (options.seeds.empty()) throw ArgumentError("campaign: seeds must not be empty");
  if (options.horizons.empty()) throw ArgumentError("campaign: horizons must not be empty");
  if (options.n < 1 || options.n > kMaxReferenceDim) {
    throw CapabilityError("campaign: bound checks need the grid oracle, n <= 3");
  }
  const std::size_t count = options.seeds.size();
  std::vector<std::vector<BoundRow>> cells(count);
  parallel_cells(count, [&](std::size_t i) {
    const std::uint64_t seed = options.seeds[i];
    switch (check) {
      case BoundCheck::Theorem1:
        cells[i] = theorem1_rows(convex_qp_instance(options.n, seed), options);
        break;
      case BoundCheck::Theorem2:
        cells[i] = theorem2_rows(convex_qp_instance(options.n, seed), options);
        break;
      case BoundCheck::Corollary1:
        cells[i] = corollary1_rows(singular_qp_instance(seed, i, count), options);
        break;
      case BoundCheck::Theorem3:
        cells[i] = theorem3_rows(pl_qp_instance(options.n, seed), options);
        break;
      case BoundCheck::Conjecture1:
        cells[i] = conjecture1_rows(pl_qp_instance(options.n, seed), options);
        break;
    }
  });

  std::vector<BoundRow> rows;
  for (auto& cell : cells) rows.insert(rows.end(), cell.begin(), cell.end());
  std::stable_sort(rows.begin(), rows.end(), [](const BoundRow& a, const BoundRow& b) {
    return a.seed < b.seed;
  });
  return rows;
}

CampaignSummary summarize(const std::vector<BoundRow>& rows) {
  CampaignSummary s;
  s.rows = rows.size();
  s.passed = static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const BoundRow& r) { return r.satisfied; }));
  return s;
}

std::vector<double> gap_envelope(const std::vector<BoundRow>& rows,
                                 const std::vector<std::size_t>& horizons) {
  std::vector<double> envelope(horizons.size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      if (r.horizon == horizons[i]) envelope[i] = std::max(envelope[i], r.gap);
    }
  }
  return envelope;
}

LinearRateSeries pl_gap_series(const BoxQpInstance& instance, std::size_t max_iterations,
                               double floor) {
  const ReferenceOptimum ref = reference_optimum(instance.model);
  const double beta = 1.0 / lipschitz_constant(instance.model);
  EcimConfig config{StepSchedule::fixed(beta), 0.0, max_iterations, instance.seed, false};
  const EcimTrace trace = run_ecim(instance.model, config, instance.s0);
  LinearRateSeries series;
  for (std::size_t k = 0; k < trace.energies.size(); ++k) {
    const double gap = trace.energies[k] - ref.e_star;
    if (!(gap >= floor)) break;
    series.horizons.push_back(static_cast<double>(k));
    series.gaps.push_back(gap);
  }
  return series;
}

OracleComparison compare_oracles(const BoxQpInstance& instance, const EcimConfig& ecim) {
  const QuadraticModel& model = instance.model;
  const Eigen::Index n = model.dim();
  EcimConfig config = ecim;
  config.seed = instance.seed;
  const EcimTrace trace = run_ecim(model, config, instance.s0);
  const OracleSolution ball =
      exact_ball_minimize(model.field(), model.symmetric_coupling(), model.delta());
  GridOptions grid_options;
  grid_options.resolution = 2.0 * model.delta() / (n <= 2 ? 1000.0 : 100.0);
  grid_options.polish_steps = 300000;
  grid_options.polish_tol = 1e-15;
  const OracleSolution grid = grid_minimize_box(model, grid_options);

  OracleComparison out;
  out.seed = instance.seed;
  out.n = n;
  out.delta = model.delta();
  out.ecim_value = trace.best_energy;
  out.ball_value = ball.value;
  out.grid_value = grid.value;
  out.unification_c = -out.ecim_value / std::abs(out.grid_value);
  out.ball_dominance = out.ecim_value <= out.ball_value + kBallDominanceSlack;
  out.grid_agreement = std::abs(out.ecim_value - out.grid_value) <= kGridAgreementTol;
  out.unification = out.unification_c >= kUnificationC;
  return out;
}

std::vector<OracleComparison> oracle_campaign(const std::vector<std::uint64_t>& seeds,
                                              const EcimConfig& ecim) {
  std::vector<OracleComparison> out(seeds.size());
  parallel_cells(seeds.size(), [&](std::size_t i) {
    const Eigen::Index n = i % 2 == 0 ? 2 : 3;
    out[i] = compare_oracles(random_subproblem_instance(n, seeds[i]), ecim);
  });
  return out;
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace itrust
