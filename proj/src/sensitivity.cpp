#include "disparity/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disparity/errors.hpp"
#include "disparity/regress.hpp"

namespace disparity {

void SensitivityParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) {
      std::ostringstream msg;
      msg << name << " must lie in [0, 1), got " << v;
      throw ConfigError(msg.str());
    }
  };
  check(r2_yu, "r2_yu");
  check(r2_mu, "r2_mu");
  if (sign != 1 && sign != -1) throw ConfigError("sign must be +1 or -1");
}

SensitivityInputs sensitivity_inputs(const Dataset& data) {
  const auto& roles = data.roles();
  std::vector<std::string> cols{roles.group};
  for (const auto& c : roles.covariates()) cols.push_back(c);

  const auto mediator_fit = fit_ols(make_design(data, cols), column_vector(data, roles.mediator));
  if (!(mediator_fit.residual_sd > 0.0) || mediator_fit.r_squared > 1.0 - 1e-12) {
    throw EstimationError("mediator fully explained by observed covariates");
  }
  cols.push_back(roles.mediator);
  const auto outcome_fit = fit_ols(make_design(data, cols), column_vector(data, roles.outcome));

  SensitivityInputs in;
  in.outcome_residual_sd = outcome_fit.residual_sd;
  in.mediator_residual_sd = mediator_fit.residual_sd;

  double gap = 0.0;
  const auto rows1 = data.group_indices(1);
  const auto base1 = make_design(data, roles.baseline, rows1);
  for (int g = 0; g < 2; ++g) {
    const auto rows = data.group_indices(g);
    const auto fit = fit_ols(make_design(data, roles.baseline, rows),
                             column_vector(data, roles.mediator, rows));
    const double mean_at_1 = fit.predict(base1.values).mean();
    gap += g == 1 ? mean_at_1 : -mean_at_1;
  }
  in.mediator_gap = gap;
  return in;
}

AdjustedResult adjust(const DecompositionResult& cda, const SensitivityInputs& inputs,
                      const SensitivityParams& params) {
  if (cda.method != Method::cda) throw ConfigError("sensitivity adjustment requires a CDA result");
  params.validate();
  if (!(inputs.mediator_residual_sd > 0.0)) {
    throw EstimationError("mediator fully explained by observed covariates");
  }

  const double strength = std::sqrt(params.r2_yu * params.r2_mu / (1.0 - params.r2_mu));
  const double magnitude = strength * inputs.outcome_residual_sd / inputs.mediator_residual_sd *
                           std::abs(inputs.mediator_gap);
  const double gap_sign = inputs.mediator_gap < 0.0 ? -1.0 : 1.0;

  AdjustedResult out;
  out.r2_yu = params.r2_yu;
  out.r2_mu = params.r2_mu;
  out.sign = params.sign;
  out.bias = params.sign * gap_sign * magnitude;
  out.tau = cda.initial;
  out.delta_adjusted = cda.explained - out.bias;
  out.zeta_adjusted = cda.unexplained + out.bias;
  return out;
}

AdjustedResult adjust(const DecompositionResult& cda, const Dataset& data,
                      const SensitivityParams& params) {
  return adjust(cda, sensitivity_inputs(data), params);
}

std::vector<AdjustedResult> grid(const DecompositionResult& cda, const Dataset& data,
                                 std::span<const double> r2_yu_values,
                                 std::span<const double> r2_mu_values, int sign) {
  const auto inputs = sensitivity_inputs(data);
  std::vector<AdjustedResult> cells;
  cells.reserve(r2_yu_values.size() * r2_mu_values.size());
  for (double yu : r2_yu_values) {
    for (double mu : r2_mu_values) cells.push_back(adjust(cda, inputs, {yu, mu, sign}));
  }
  return cells;
}

std::vector<BenchmarkRecord> benchmark(const Dataset& data) {
  const auto& roles = data.roles();
  const auto covariates = roles.covariates();
  const auto y = column_vector(data, roles.outcome);
  const auto m = column_vector(data, roles.mediator);

  std::vector<std::string> all{roles.group, roles.mediator};
  all.insert(all.end(), covariates.begin(), covariates.end());
  const auto design = make_design(data, all);

  std::vector<BenchmarkRecord> out;
  for (const auto& z : covariates) {
    std::vector<std::string> others;
    for (const auto& c : covariates) {
      if (c != z) others.push_back(c);
    }
    std::vector<std::string> y_controls{roles.group, roles.mediator};
    y_controls.insert(y_controls.end(), others.begin(), others.end());
    std::vector<std::string> m_controls{roles.group};
    m_controls.insert(m_controls.end(), others.begin(), others.end());

    BenchmarkRecord rec{z, 0.0, 0.0};
    try {
      rec.r2_with_y = partial_r2(design, y, z, y_controls);
      rec.r2_with_m = partial_r2(design, m, z, m_controls);
    } catch (const RankDeficientError& e) {
      throw RankDeficientError("covariate " + z + ": " + e.what(), e.dependent_columns());
    } catch (const EstimationError& e) {
      throw EstimationError("covariate " + z + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.r2_with_y > b.r2_with_y; });
  return out;
}

}  // namespace disparity
