#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disparity/tabular.hpp"

namespace disparity {

enum class Method { dic, kob, cda };

std::string_view to_string(Method m) noexcept;
/// Accepts "dic", "kob", "cda" in any letter case.
Method parse_method(std::string_view text);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Initial disparity split into the part explained by the mediator and the rest.
///
/// For CDA, initial/explained/unexplained are the C-standardized initial
/// disparity, the disparity reduction and the disparity remaining.
struct DecompositionResult {
  Method method = Method::dic;
  double initial = 0.0;
  double explained = 0.0;
  double unexplained = 0.0;
  /// explained / initial * 100; empty when the initial disparity is ~0.
  std::optional<double> proportion_explained_pct;

  std::optional<Interval> initial_ci;
  std::optional<Interval> explained_ci;
  std::optional<Interval> unexplained_ci;
};

struct DicResult {
  DecompositionResult result;
  double group_coef_without_mediator = 0.0;  // coefficient on R, mediator excluded
  double group_coef_with_mediator = 0.0;     // coefficient on R, mediator included
  double mediator_coef = 0.0;
};

/// Every term of the two-group decomposition, in baseline, intermediate,
/// mediator order.
struct KobDetail {
  std::vector<std::pair<std::string, double>> explained_by;
  double intercept_gap = 0.0;
  std::vector<std::pair<std::string, double>> slope_gaps;

  double total() const;
};

struct KobResult {
  DecompositionResult result;
  KobDetail detail;
};

enum class ResidualMode { empirical_resample, parametric_normal };

struct CdaSettings {
  int mc_draws_per_unit = 100;
  ResidualMode residual_mode = ResidualMode::empirical_resample;
  std::uint64_t seed = 0;
  /// Adds mediator x covariate products to the group-1 outcome model.
  bool mediator_interactions = false;
};

/// Difference in the group coefficient between outcome models without and
/// with the mediator, both adjusting for baseline and intermediate covariates.
DicResult decompose_dic(const Dataset& data);

/// Two-group decomposition from group-specific outcome regressions on
/// covariates and mediator. Only the mediator's explained term counts as
/// "explained"; the detail keeps every term.
KobResult decompose_kob(const Dataset& data);

/// Monte Carlo g-formula imputation.
///
/// Standardizes to the empirical baseline-covariate distribution of group 1.
/// Each group-1 unit receives mc_draws_per_unit mediator draws from the
/// group-0 mediator model given its baseline covariates; those draws are fed
/// through the group-1 outcome model. explained + unexplained == initial
/// exactly.
DecompositionResult decompose_cda(const Dataset& data, const CdaSettings& settings = {});

DecompositionResult decompose(const Dataset& data, Method method, const CdaSettings& settings = {});

/// Value at 1-based index ceil(q * n) of the sorted sample.
double percentile(std::vector<double> values, double q);

/// Within-group unit bootstrap with percentile intervals.
///
/// Replicate b draws from its own stream derived from (seed, b), so the
/// intervals do not depend on `workers`. A replicate whose resample breaks an
/// estimator precondition is redrawn; the call fails after 10 * B redraws.
DecompositionResult bootstrap(const Dataset& data, Method method, const CdaSettings& settings,
                              int replicates, std::uint64_t seed, unsigned workers = 1);

}  // namespace disparity
