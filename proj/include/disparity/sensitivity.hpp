#pragma once

#include <span>
#include <string>
#include <vector>

#include "disparity/decompose.hpp"
#include "disparity/tabular.hpp"

namespace disparity {

/// Strength of a hypothetical unmeasured mediator-outcome confounder U.
struct SensitivityParams {
  double r2_yu = 0.0;  // partial R2 of U with Y given R, X, M, C
  double r2_mu = 0.0;  // partial R2 of U with M given R, X, C
  int sign = +1;       // +1 when U moves M and Y in the same direction

  void validate() const;
};

struct AdjustedResult {
  double r2_yu = 0.0;
  double r2_mu = 0.0;
  int sign = +1;
  double bias = 0.0;
  double delta_adjusted = 0.0;
  double zeta_adjusted = 0.0;
  double tau = 0.0;
};

/// Data-dependent pieces of the bias formula; computed once per dataset.
struct SensitivityInputs {
  double outcome_residual_sd = 0.0;   // Y on R, C, X, M (pooled)
  double mediator_residual_sd = 0.0;  // M on R, C, X (pooled)
  double mediator_gap = 0.0;          // mediator gap standardized to group-1 C
};

SensitivityInputs sensitivity_inputs(const Dataset& data);

/// Omitted-variable-bias correction of a CDA result:
///   |bias| = sqrt(r2_yu * r2_mu / (1 - r2_mu)) * sd(Y resid) / sd(M resid) * |gap|
/// signed by sign * sgn(gap); subtracted from the reduction, added to the
/// remaining disparity.
AdjustedResult adjust(const DecompositionResult& cda, const SensitivityInputs& inputs,
                      const SensitivityParams& params);
AdjustedResult adjust(const DecompositionResult& cda, const Dataset& data,
                      const SensitivityParams& params);

/// Row-major: cell (i, j) is at i * r2_mu_values.size() + j.
std::vector<AdjustedResult> grid(const DecompositionResult& cda, const Dataset& data,
                                 std::span<const double> r2_yu_values,
                                 std::span<const double> r2_mu_values, int sign);

struct BenchmarkRecord {
  std::string name;
  double r2_with_y = 0.0;
  double r2_with_m = 0.0;
};

/// Partial R2 of each observed covariate with Y (given R, M and the other
/// covariates) and with M (given R and the other covariates), sorted by
/// r2_with_y descending.
std::vector<BenchmarkRecord> benchmark(const Dataset& data);

}  // namespace disparity
