#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disparity/tabular.hpp"

namespace disparity {

/// Named regressor columns, one row per unit. No intercept column; fit_ols adds it.
struct Design {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

/// Builds a design from dataset columns, optionally restricted to `rows`.
Design make_design(const Dataset& data, std::span<const std::string> columns);
Design make_design(const Dataset& data, std::span<const std::string> columns,
                   std::span<const std::size_t> rows);

Eigen::VectorXd column_vector(const Dataset& data, std::string_view column);
Eigen::VectorXd column_vector(const Dataset& data, std::string_view column,
                              std::span<const std::size_t> rows);

inline constexpr std::string_view kInterceptName = "(intercept)";

struct OlsFit {
  /// Includes "(intercept)" first when the fit has an intercept.
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  /// sqrt(SSR / (n - p)), p counting the intercept.
  double residual_sd = 0.0;
  double r_squared = 0.0;
  bool intercept = true;

  double coefficient(std::string_view name) const;
  /// Prediction for one row of regressors given in Design column order.
  double predict(std::span<const double> regressors) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& regressors) const;
};

/// Least squares via column-pivoted Householder QR.
///
/// Throws EstimationError when n <= p and RankDeficientError (naming a
/// minimal linearly dependent set of columns) when the design is rank
/// deficient at relative pivot threshold 1e-10.
OlsFit fit_ols(const Design& design, const Eigen::VectorXd& response, bool intercept = true);

/// Share of the reduced model's residual variance explained by adding `focal`:
/// (R2_full - R2_reduced) / (1 - R2_reduced), clamped to [0, 1]. An intercept
/// is always included.
double partial_r2(const Design& design, const Eigen::VectorXd& response, std::string_view focal,
                  std::span<const std::string> controls);

}  // namespace disparity
