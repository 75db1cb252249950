#pragma once

// Seeded box-QP instance families and the bound-verification campaigns run
// by the CLI and the acceptance suite.

#include "itrust/ecim.hpp"
#include "itrust/model.hpp"
#include "itrust/oracles.hpp"
#include "itrust/rate_fit.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace itrust {

struct BoxQpInstance {
  std::string family;
  std::uint64_t seed = 0;
  QuadraticModel model;
  Vector s0;  ///< seeded uniform start in the box
};

/// (J + J^T) / 2 = Q diag(lambda) Q^T with lambda_i ~ U[0, 2], plus a random
/// skew-symmetric part in J; h ~ U[-1, 1]^n; delta = 1/2.
BoxQpInstance convex_qp_instance(Eigen::Index n, std::uint64_t seed);

/// Strongly convex (eigenvalues in [0.5, 2]) with the unconstrained
/// minimizer inside the box, so E* is attained at a zero-gradient point.
BoxQpInstance pl_qp_instance(Eigen::Index n, std::uint64_t seed);

/// n = 3, eigenvalues (1, lambda2, 0) with lambda2 log-uniform in stratum
/// `stratum` of `strata` equal slices of [1e-4, 10^-0.5]; h in range(S).
BoxQpInstance singular_qp_instance(std::uint64_t seed, std::size_t stratum, std::size_t strata);

/// Random trust-region-like subproblem: S = B B^T / n, h ~ N(0, 1),
/// delta ~ U[0.2, 1].
BoxQpInstance random_subproblem_instance(Eigen::Index n, std::uint64_t seed);

struct ReferenceOptimum {
  Vector s_star;
  double e_star = 0.0;
  double resolution = 0.0;
};

/// Grid oracle (resolution 1e-3 for n <= 2, 1e-2 for n = 3) followed by a
/// long projected-gradient polish. Throws CapabilityError for n > 3.
ReferenceOptimum reference_optimum(const QuadraticModel& model);

enum class BoundCheck { Theorem1, Corollary1, Theorem2, Theorem3, Conjecture1 };

const char* to_string(BoundCheck check);
std::optional<BoundCheck> parse_bound_check(const std::string& name);

/// One (instance, horizon) observation. Fields that do not apply are NaN.
struct BoundRow {
  std::string check;
  std::string family;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  double beta = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  double dist0 = 0.0;  ///< ||s(0) - s*||
  double G = 0.0;
  double L = 0.0;
  double mu = 0.0;
  double mu_p = 0.0;
};

struct CampaignOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> horizons;
  Eigen::Index n = 2;
  /// Theorem1: beta = beta0 / L. Theorem2: beta_k = beta0 / L / (k + 1)^power.
  double beta0 = 1.0;
  double decreasing_power = 1.0;
  /// Theorem3 target accuracy for the iteration-count check.
  double epsilon = 1e-6;
  /// Theorem3 gaps below this are treated as converged.
  double gap_floor = 1e-12;
};

/// Runs one check over all seeds (cells in parallel). Rows are ordered by
/// seed, then horizon.
std::vector<BoundRow> run_bound_campaign(BoundCheck check, const CampaignOptions& options);

struct CampaignSummary {
  std::size_t rows = 0;
  std::size_t passed = 0;
  double pass_rate() const { return rows == 0 ? 1.0 : static_cast<double>(passed) / rows; }
};

CampaignSummary summarize(const std::vector<BoundRow>& rows);

/// Worst gap across instances at each horizon (Corollary1 rows).
std::vector<double> gap_envelope(const std::vector<BoundRow>& rows,
                                 const std::vector<std::size_t>& horizons);

/// Fixed-step ECIM (beta = 1/L) on a PL instance; gaps E(s(k)) - E* for
/// k = 0 .. max_iterations, truncated once the gap falls below floor.
struct LinearRateSeries {
  std::vector<double> horizons;
  std::vector<double> gaps;
};
LinearRateSeries pl_gap_series(const BoxQpInstance& instance, std::size_t max_iterations,
                               double floor = 1e-12);

/// ECIM vs ExactBall vs grid oracle on one subproblem.
struct OracleComparison {
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  double delta = 0.0;
  double ecim_value = 0.0;
  double ball_value = 0.0;
  double grid_value = 0.0;
  double unification_c = 0.0;  ///< -E(ecim) / |E*|
  bool ball_dominance = false;  ///< ecim <= ball + 1e-6
  bool grid_agreement = false;  ///< |ecim - grid| <= 1e-4
  bool unification = false;     ///< c >= 0.9
};

inline constexpr double kBallDominanceSlack = 1e-6;
inline constexpr double kGridAgreementTol = 1e-4;
inline constexpr double kUnificationC = 0.9;

OracleComparison compare_oracles(const BoxQpInstance& instance, const EcimConfig& ecim);

/// Runs compare_oracles over seeds (parallel), alternating n = 2 and n = 3.
std::vector<OracleComparison> oracle_campaign(const std::vector<std::uint64_t>& seeds,
                                              const EcimConfig& ecim);

/// FNV-1a over a canonical configuration string; stable across platforms.
std::string config_hash(const std::string& canonical);

}  // namespace itrust
