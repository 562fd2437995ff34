#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "disparity/decompose.hpp"
#include "disparity/sensitivity.hpp"
#include "disparity/tabular.hpp"

namespace disparity {

/// Which variables and which confounding paths the linear SEM contains.
///
///   none     R -> M -> Y
///   c-only   + baseline covariate C
///   x-only   + intermediate confounders X1..X3
///   cx       C and X
///   xm-conf  cx + latent U -> X, U -> M
///   my-conf  cx + latent U -> M, U -> Y
///   both     cx + U -> X, M, Y
enum class Scenario { none, c_only, x_only, cx, xm_conf, my_conf, both };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view tag);
const std::array<Scenario, 7>& all_scenarios() noexcept;

bool has_baseline(Scenario s) noexcept;
bool has_intermediate(Scenario s) noexcept;
bool allows_u_on_x(Scenario s) noexcept;
bool allows_u_on_m(Scenario s) noexcept;
bool allows_u_on_y(Scenario s) noexcept;

inline constexpr double kDefaultUOnX = 0.5;
inline constexpr double kDefaultUOnM = 1.0;
inline constexpr double kDefaultUOnY = 1.5;

/// Structural coefficients. U is standard normal; every equation has its own
/// independent Gaussian noise. Terms on variables absent from a scenario are
/// ignored.
struct SemCoefficients {
  double p_r = 0.5;

  struct Baseline {
    double intercept = 1.0;
    double on_r = -0.5;
    double noise_sd = 1.0;
  } c;

  struct Intermediate {
    double intercept = 0.0;
    double on_r = 0.4;
    double on_c = 0.2;
    double on_u = 0.0;
    double noise_sd = 1.0;
  };
  std::array<Intermediate, 3> x{};

  struct Mediator {
    double intercept = 1.0;
    double on_r = -0.6;
    double on_c = 0.1;
    std::array<double, 3> on_x{0.2, 0.2, 0.2};
    double on_u = 0.0;
    double noise_sd = 1.0;
  } m;

  struct Outcome {
    double intercept = 0.0;
    double on_r = 0.5;
    double on_c = 0.3;
    std::array<double, 3> on_x{0.25, 0.25, 0.25};
    double on_m = 0.4;
    double on_u = 0.0;
    double noise_sd = 1.0;
  } y;

  /// Base coefficients with the scenario's U loadings switched on.
  static SemCoefficients defaults(Scenario s);
};

struct ScenarioConfig {
  Scenario scenario = Scenario::none;
  std::size_t n = 2000;
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  SemCoefficients coefficients{};

  static ScenarioConfig defaults(Scenario s);

  /// Throws ConfigError on n < 50, reps < 1, non-positive noise sd,
  /// p_r outside (0, 1), or a U loading the scenario does not allow.
  void validate() const;
};

/// Parses a JSON document; omitted fields take the scenario defaults. When
/// `scenario_override` is set it replaces the document's "scenario".
ScenarioConfig config_from_json(std::string_view text,
                                 std::optional<Scenario> scenario_override = std::nullopt);
ScenarioConfig load_config(const std::filesystem::path& path,
                           std::optional<Scenario> scenario_override = std::nullopt);
std::string config_to_json(const ScenarioConfig& config);

/// Draws replication `rep_index`. Columns: R, [C], [X1, X2, X3], M, Y and,
/// with include_latent, U (not role-tagged).
Dataset generate(const ScenarioConfig& config, std::size_t rep_index, bool include_latent = false);

/// Model-implied moments. Variable order: C, U, X1, X2, X3, M, Y; absent
/// variables are identically zero. Conditional on R the variables are
/// Gaussian with group-specific means and a common covariance.
struct SemMoments {
  static constexpr std::array<std::string_view, 7> names{"C", "U", "X1", "X2", "X3", "M", "Y"};
  double p_r = 0.5;
  Eigen::VectorXd mean0;
  Eigen::VectorXd mean1;
  Eigen::MatrixXd within;

  /// Unconditional moments over (R, C, U, X1, X2, X3, M, Y).
  Eigen::VectorXd pooled_mean() const;
  Eigen::MatrixXd pooled_cov() const;
};

SemMoments propagate_moments(const ScenarioConfig& config);

struct Triple {
  double initial = 0.0;
  double explained = 0.0;
  double unexplained = 0.0;
};

struct TrueValues {
  Triple dic;
  Triple kob;
  Triple cda;

  const Triple& of(Method m) const;
};

/// Each method's own population target, computed as if U were observed:
/// DIC and KOB use population projections that include U, CDA uses the
/// structural counterfactual standardized to group 1's C distribution.
TrueValues compute_truths(const ScenarioConfig& config);

/// Probability limits of the estimators as implemented (U unobserved).
/// limits - truths is the asymptotic bias.
TrueValues estimator_limits(const ScenarioConfig& config);

/// Part of the raw gap carried by R -> C -> ... -> Y, by path tracing.
double c_pathway_contribution(const ScenarioConfig& config);
/// Part of the C-adjusted gap carried by R -> X -> ... -> Y, by path tracing.
double x_pathway_contribution(const ScenarioConfig& config);

/// Population partial R2s of U and the sign of the induced mediator-coefficient bias.
SensitivityParams oracle_sensitivity_params(const ScenarioConfig& config);

struct HarnessOptions {
  std::vector<Method> methods{Method::dic, Method::kob, Method::cda};
  bool oracle_sensitivity = false;
  int mc_draws_per_unit = 100;
  ResidualMode residual_mode = ResidualMode::empirical_resample;
  unsigned workers = 1;
};

struct ReplicateEstimates {
  std::optional<DecompositionResult> dic;
  std::optional<DecompositionResult> kob;
  std::optional<DecompositionResult> cda;
  std::optional<AdjustedResult> adjusted;
};

struct QuantitySummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double truth = 0.0;
  double mc_se = 0.0;
  bool covered = false;
};

struct MethodSummary {
  std::string label;  // DIC, KOB, CDA, Adj. CDA
  QuantitySummary initial;
  QuantitySummary explained;
  QuantitySummary unexplained;
};

struct SimulationReport {
  ScenarioConfig config;
  TrueValues truths;
  std::vector<MethodSummary> methods;
  std::vector<ReplicateEstimates> replicates;
  /// Fewer than 20 replications: percentile intervals are not meaningful.
  bool interval_unreliable = false;

  const MethodSummary& method(std::string_view label) const;
};

/// Replicates, estimates, and aggregates against compute_truths. Results do
/// not depend on options.workers.
SimulationReport run_harness(const ScenarioConfig& config, const HarnessOptions& options = {});

}  // namespace disparity
