#include "itrust/ecim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace itrust {

namespace {

// Keeps the init stream and the noise stream of one seed apart.
constexpr std::uint64_t kInitStreamSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

void StepSchedule::validate() const {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ArgumentError("step schedule: beta / beta0 must be positive and finite");
  }
  if (kind == ScheduleKind::Decreasing && !(power > 0.5 && power <= 1.0)) {
    throw ArgumentError("step schedule: decreasing power must lie in (0.5, 1]");
  }
}

StepSchedule StepSchedule::resolve(const QuadraticModel& model) const {
  if (kind != ScheduleKind::InverseLipschitz) return *this;
  double l = lipschitz_constant(model);
  if (!(l > 0.0)) l = 1.0;
  return fixed(value / l);
}

double step_size(const StepSchedule& schedule, std::size_t k, std::size_t horizon) {
  switch (schedule.kind) {
    case ScheduleKind::Fixed:
      return schedule.value;
    case ScheduleKind::FixedHorizon:
      return schedule.value / std::sqrt(static_cast<double>(std::max<std::size_t>(horizon, 1)));
    case ScheduleKind::Decreasing:
      return schedule.value / std::pow(static_cast<double>(k + 1), schedule.power);
    case ScheduleKind::InverseLipschitz:
      break;
  }
  throw ArgumentError("step_size: InverseLipschitz schedule must be resolved against a model");
}

double lipschitz_constant(const QuadraticModel& model) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(model.symmetric_coupling(),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

void EcimConfig::validate() const {
  schedule.validate();
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw ArgumentError("ecim: sigma2 must be non-negative");
  }
}

std::vector<double> EcimTrace::best_energy_history() const {
  std::vector<double> out(energies.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < energies.size(); ++k) {
    best = std::min(best, energies[k]);
    out[k] = best;
  }
  return out;
}

Vector NoiseSource::sample(Eigen::Index n, double stddev) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = stddev * normal_(engine_);
  return z;
}

Vector random_box_point(Eigen::Index n, double delta, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> uniform(-delta, delta);
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = uniform(engine);
  return s;
}

Vector project_box(const Vector& z, double delta) {
  return z.cwiseMax(-delta).cwiseMin(delta);
}

Vector ecim_step(const QuadraticModel& model, const Vector& s, double beta,
                 const Vector& noise) {
  require_dim(s.size(), model.dim(), "ecim_step");
  require_dim(noise.size(), model.dim(), "ecim_step noise");
  return project_box(s - beta * (energy_gradient(model, s) - noise), model.delta());
}

Vector gradient_mapping(const Vector& s, const Vector& s_next, double beta) {
  require_dim(s_next.size(), s.size(), "gradient_mapping");
  if (!(beta > 0.0)) throw ArgumentError("gradient_mapping: beta must be positive");
  return (s - s_next) / beta;
}

Vector legacy_pmim_step(const Matrix& coupling, const Vector& s, double alpha, double beta,
                        const Vector& noise, double clip) {
  require_dim(coupling.rows(), s.size(), "legacy_pmim_step");
  require_dim(coupling.cols(), s.size(), "legacy_pmim_step");
  require_dim(noise.size(), s.size(), "legacy_pmim_step noise");
  const Vector js = coupling * s;
  Vector out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out[i] = std::abs(s[i]) <= clip ? alpha * s[i] - beta * js[i] + noise[i] : 0.0;
  }
  return out;
}

EcimTrace run_ecim(const QuadraticModel& model, const EcimConfig& config, const Vector& s0) {
  config.validate();
  require_dim(s0.size(), model.dim(), "run_ecim s0");
  const StepSchedule schedule = config.schedule.resolve(model);
  const std::size_t horizon = config.iterations;
  const double delta = model.delta();
  const double sigma = std::sqrt(config.sigma2);
  const Matrix sym = model.symmetric_coupling();
  const Vector& h = model.field();
  NoiseSource noise(config.seed);

  EcimTrace trace;
  trace.iterates.reserve(horizon + 1);
  trace.energies.reserve(horizon + 1);
  trace.betas.reserve(horizon);
  trace.gm_norms.reserve(horizon);

  Vector s = s0;
  if (s.cwiseAbs().maxCoeff() > delta) {
    s = project_box(s, delta);
    trace.initial_projected = true;
  }

  auto record_energy = [&](const Vector& x, std::size_t k) {
    const double e = energy(model, x);
    if (!std::isfinite(e) || std::abs(e) > kDivergenceEnergy) {
      throw DivergenceError("ecim diverged at iteration " + std::to_string(k), k);
    }
    trace.energies.push_back(e);
  };

  record_energy(s, 0);
  trace.iterates.push_back(s);

  Vector weighted = Vector::Zero(s.size());
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double beta = step_size(schedule, k, horizon);
    Vector grad = sym * s + h;
    if (sigma > 0.0) {
      const double stddev = config.modulate_noise ? beta * sigma : sigma;
      grad -= noise.sample(s.size(), stddev);
    }
    Vector next = project_box(s - beta * grad, delta);

    weighted += beta * s;
    weight_sum += beta;
    trace.betas.push_back(beta);
    trace.gm_norms.push_back(((s - next) / beta).norm());

    s = std::move(next);
    record_energy(s, k + 1);
    trace.iterates.push_back(s);
  }

  const auto best = std::min_element(trace.energies.begin(), trace.energies.end());
  trace.best_index = static_cast<std::size_t>(best - trace.energies.begin());
  trace.best_energy = *best;
  trace.best_iterate = trace.iterates[trace.best_index];
  trace.averaged_iterate = weight_sum > 0.0 ? Vector(weighted / weight_sum) : trace.iterates[0];
  return trace;
}

EcimTrace run_ecim(const QuadraticModel& model, const EcimConfig& config) {
  std::mt19937_64 init(config.seed ^ kInitStreamSalt);
  return run_ecim(model, config, random_box_point(model.dim(), model.delta(), init));
}

}  // namespace itrust
