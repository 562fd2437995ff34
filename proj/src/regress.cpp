#include "disparity/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "disparity/errors.hpp"

namespace disparity {

namespace {

constexpr double kPivotThreshold = 1e-10;

std::vector<std::size_t> all_rows(const Dataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Given a rank-deficient matrix, returns one column that depends on the
// pivoted basis plus the basis columns its representation uses.
std::vector<Eigen::Index> minimal_dependent_set(const Eigen::MatrixXd& x,
                                                const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Eigen::Index> basis(perm.data(), perm.data() + rank);
  const Eigen::Index dependent = perm[rank];

  Eigen::MatrixXd b(x.rows(), rank);
  for (Eigen::Index k = 0; k < rank; ++k) b.col(k) = x.col(basis[k]);
  const Eigen::VectorXd target = x.col(dependent);
  const Eigen::VectorXd weights = b.colPivHouseholderQr().solve(target);

  std::vector<Eigen::Index> out{dependent};
  const double scale = std::max(target.norm(), 1e-300);
  for (Eigen::Index k = 0; k < rank; ++k) {
    if (std::abs(weights[k]) * b.col(k).norm() > 1e-8 * scale) out.push_back(basis[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Design make_design(const Dataset& data, std::span<const std::string> columns) {
  const auto rows = all_rows(data);
  return make_design(data, columns, rows);
}

Design make_design(const Dataset& data, std::span<const std::string> columns,
                   std::span<const std::size_t> rows) {
  Design d;
  d.names.assign(columns.begin(), columns.end());
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = data.column(columns[j]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[rows[i]];
    }
  }
  return d;
}

Eigen::VectorXd column_vector(const Dataset& data, std::string_view column) {
  const auto& col = data.column(column);
  return Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
}

Eigen::VectorXd column_vector(const Dataset& data, std::string_view column,
                              std::span<const std::size_t> rows) {
  const auto& col = data.column(column);
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = col[rows[i]];
  return out;
}

double OlsFit::coefficient(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw EstimationError("no coefficient named " + std::string(name));
  return coefficients[it - names.begin()];
}

double OlsFit::predict(std::span<const double> regressors) const {
  const Eigen::Index offset = intercept ? 1 : 0;
  if (static_cast<Eigen::Index>(regressors.size()) + offset != coefficients.size()) {
    throw EstimationError("prediction row has the wrong number of regressors");
  }
  double y = intercept ? coefficients[0] : 0.0;
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    y += coefficients[static_cast<Eigen::Index>(j) + offset] * regressors[j];
  }
  return y;
}

Eigen::VectorXd OlsFit::predict(const Eigen::MatrixXd& regressors) const {
  const Eigen::Index offset = intercept ? 1 : 0;
  if (regressors.cols() + offset != coefficients.size()) {
    throw EstimationError("prediction matrix has the wrong number of regressors");
  }
  Eigen::VectorXd y = regressors * coefficients.tail(regressors.cols());
  if (intercept) y.array() += coefficients[0];
  return y;
}

OlsFit fit_ols(const Design& design, const Eigen::VectorXd& response, bool intercept) {
  const Eigen::Index n = design.values.rows();
  if (response.size() != n) throw EstimationError("response length does not match design rows");
  if (static_cast<std::size_t>(design.values.cols()) != design.names.size()) {
    throw EstimationError("design column names do not match design width");
  }
  if (!design.values.allFinite() || !response.allFinite()) {
    throw EstimationError("design or response contains non-finite values");
  }

  OlsFit fit;
  fit.intercept = intercept;
  if (intercept) fit.names.emplace_back(kInterceptName);
  fit.names.insert(fit.names.end(), design.names.begin(), design.names.end());
  const auto p = static_cast<Eigen::Index>(fit.names.size());

  if (n <= p) {
    std::ostringstream msg;
    msg << "insufficient observations: n = " << n << " with " << p << " design columns";
    throw EstimationError(msg.str());
  }

  Eigen::MatrixXd x(n, p);
  if (intercept) x.col(0).setOnes();
  x.rightCols(design.values.cols()) = design.values;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
  qr.setThreshold(kPivotThreshold);
  qr.compute(x);
  if (qr.rank() < p) {
    const auto dependent = minimal_dependent_set(x, qr);
    std::vector<std::string> names;
    std::ostringstream msg;
    msg << "rank-deficient design: linearly dependent columns {";
    for (std::size_t k = 0; k < dependent.size(); ++k) {
      names.push_back(fit.names[static_cast<std::size_t>(dependent[k])]);
      msg << (k ? ", " : "") << names.back();
    }
    msg << "}";
    throw RankDeficientError(msg.str(), std::move(names));
  }

  if (intercept) {
    // Solve on centered columns; exact orthogonality in the data then gives
    // exactly zero slopes, which the uncentered factorization does not.
    const Eigen::RowVectorXd means = design.values.colwise().mean();
    const double y_mean = response.mean();
    const Eigen::MatrixXd centered = design.values.rowwise() - means;
    fit.coefficients.resize(p);
    if (p > 1) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cqr(centered.rows(), centered.cols());
      cqr.setThreshold(kPivotThreshold);
      cqr.compute(centered);
      fit.coefficients.tail(p - 1) = cqr.solve((response.array() - y_mean).matrix());
      fit.coefficients(0) = y_mean - means.dot(fit.coefficients.tail(p - 1));
    } else {
      fit.coefficients(0) = y_mean;
    }
  } else {
    fit.coefficients = qr.solve(response);
  }
  fit.residuals = response - x * fit.coefficients;

  const double ssr = fit.residuals.squaredNorm();
  fit.residual_sd = std::sqrt(ssr / static_cast<double>(n - p));
  const double sst = intercept ? (response.array() - response.mean()).matrix().squaredNorm()
                               : response.squaredNorm();
  fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  return fit;
}

double partial_r2(const Design& design, const Eigen::VectorXd& response, std::string_view focal,
                  std::span<const std::string> controls) {
  auto index_of = [&](std::string_view name) {
    const auto it = std::find(design.names.begin(), design.names.end(), name);
    if (it == design.names.end()) throw EstimationError("no design column named " + std::string(name));
    return static_cast<Eigen::Index>(it - design.names.begin());
  };
  if (std::find(controls.begin(), controls.end(), focal) != controls.end()) {
    throw EstimationError("focal column " + std::string(focal) + " is also a control");
  }

  Design reduced;
  reduced.names.assign(controls.begin(), controls.end());
  reduced.values.resize(design.values.rows(), static_cast<Eigen::Index>(controls.size()));
  for (std::size_t j = 0; j < controls.size(); ++j) {
    reduced.values.col(static_cast<Eigen::Index>(j)) = design.values.col(index_of(controls[j]));
  }
  Design full = reduced;
  full.names.emplace_back(focal);
  full.values.conservativeResize(Eigen::NoChange, full.values.cols() + 1);
  full.values.rightCols(1) = design.values.col(index_of(focal));

  const auto reduced_fit = fit_ols(reduced, response);
  const auto full_fit = fit_ols(full, response);

  const double ssr_reduced = reduced_fit.residuals.squaredNorm();
  const double sst = (response.array() - response.mean()).matrix().squaredNorm();
  if (reduced_fit.r_squared >= 1.0 || ssr_reduced <= 1e-24 * std::max(sst, 1e-300)) {
    throw EstimationError("response fully explained without focal column " + std::string(focal));
  }
  const double value = 1.0 - full_fit.residuals.squaredNorm() / ssr_reduced;
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace disparity
