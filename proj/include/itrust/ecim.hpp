#pragma once

#include "itrust/model.hpp"
#include "itrust/types.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace itrust {

enum class ScheduleKind {
  Fixed,             ///< beta_k = beta
  FixedHorizon,      ///< beta_k = beta0 / sqrt(K)
  Decreasing,        ///< beta_k = beta0 / (k + 1)^power, power in (1/2, 1]
  InverseLipschitz,  ///< beta_k = beta0 / L with L = max |eig((J + J^T) / 2)|
};

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::InverseLipschitz;
  double value = 1.0;  // beta for Fixed, beta0 otherwise
  double power = 1.0;  // Decreasing only

  static StepSchedule fixed(double beta) { return {ScheduleKind::Fixed, beta, 1.0}; }
  static StepSchedule fixed_horizon(double beta0) {
    return {ScheduleKind::FixedHorizon, beta0, 1.0};
  }
  static StepSchedule decreasing(double beta0, double power = 1.0) {
    return {ScheduleKind::Decreasing, beta0, power};
  }
  static StepSchedule inverse_lipschitz(double beta0 = 1.0) {
    return {ScheduleKind::InverseLipschitz, beta0, 1.0};
  }

  void validate() const;

  /// InverseLipschitz becomes Fixed(beta0 / L) for this model; other kinds
  /// are returned unchanged. A zero coupling is treated as L = 1.
  StepSchedule resolve(const QuadraticModel& model) const;
};

/// beta_k for 0 <= k < horizon. InverseLipschitz must be resolved first.
double step_size(const StepSchedule& schedule, std::size_t k, std::size_t horizon);

/// Largest eigenvalue magnitude of (J + J^T) / 2.
double lipschitz_constant(const QuadraticModel& model);

struct EcimConfig {
  StepSchedule schedule;
  double sigma2 = 0.0;          ///< noise variance
  std::size_t iterations = 1000;  ///< K
  std::uint64_t seed = 0;
  bool modulate_noise = false;  ///< scale the noise standard deviation by beta_k

  void validate() const;
};

struct EcimTrace {
  std::vector<Vector> iterates;   ///< s(0) .. s(K)
  std::vector<double> energies;   ///< E(s(k)), k = 0 .. K
  std::vector<double> betas;      ///< beta_k, k = 0 .. K-1
  std::vector<double> gm_norms;   ///< ||g(k)||_2, k = 0 .. K-1
  double best_energy = 0.0;
  Vector best_iterate;
  std::size_t best_index = 0;
  Vector averaged_iterate;  ///< sum beta_k s(k) / sum beta_k over k < K (s(0) when K = 0)
  bool initial_projected = false;

  /// Running minimum of energies[0..k].
  std::vector<double> best_energy_history() const;
};

/// Isotropic Gaussian noise N(0, sigma^2 I). Same seed and call sequence
/// give identical samples.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  Vector sample(Eigen::Index n, double stddev);
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Uniform sample from [-delta, delta]^n.
Vector random_box_point(Eigen::Index n, double delta, std::mt19937_64& engine);

/// Euclidean projection onto [-delta, delta]^n (component-wise clamp).
Vector project_box(const Vector& z, double delta);

/// s' = Proj(s - beta (grad E(s) - noise))
Vector ecim_step(const QuadraticModel& model, const Vector& s, double beta,
                 const Vector& noise);

/// (s - s_next) / beta
Vector gradient_mapping(const Vector& s, const Vector& s_next, double beta);

/// Clipped poor man's CIM update: for |s_i| <= clip,
/// s'_i = alpha s_i - beta (J s)_i + noise_i, otherwise s'_i = 0.
Vector legacy_pmim_step(const Matrix& coupling, const Vector& s, double alpha, double beta,
                        const Vector& noise, double clip = 0.4);

inline constexpr double kDivergenceEnergy = 1e12;

/// Runs K noisy projected-gradient steps from s0 (projected into the box
/// first when outside). The model's box is used as-is; any attached scaling
/// is ignored here. Throws DivergenceError when |E| > 1e12 or non-finite.
EcimTrace run_ecim(const QuadraticModel& model, const EcimConfig& config, const Vector& s0);

/// Same, starting from a seeded uniform point of the box.
EcimTrace run_ecim(const QuadraticModel& model, const EcimConfig& config);

}  // namespace itrust
