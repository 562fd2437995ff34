#include "disparity/decompose.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "disparity/errors.hpp"
#include "disparity/parallel.hpp"
#include "disparity/random.hpp"
#include "disparity/regress.hpp"

namespace disparity {

namespace {

std::optional<double> proportion(double explained, double initial, const Dataset& data) {
  const auto& y = data.outcome();
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (initial == 0.0 || std::abs(initial) < 1e-9 * scale) return std::nullopt;
  return explained / initial * 100.0;
}

OlsFit fit_in_group(const Design& design, const Eigen::VectorXd& y, int group) {
  const std::string tag = "group " + std::to_string(group) + ": ";
  try {
    return fit_ols(design, y);
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(tag + e.what(), e.dependent_columns());
  } catch (const EstimationError& e) {
    throw EstimationError(tag + e.what());
  }
}

double mean_over(const std::vector<double>& col, std::span<const std::size_t> rows) {
  double s = 0.0;
  for (auto i : rows) s += col[i];
  return s / static_cast<double>(rows.size());
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::dic: return "DIC";
    case Method::kob: return "KOB";
    case Method::cda: return "CDA";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dic") return Method::dic;
  if (lower == "kob") return Method::kob;
  if (lower == "cda") return Method::cda;
  throw ConfigError("unknown method " + std::string(text));
}

double KobDetail::total() const {
  double sum = intercept_gap;
  for (const auto& [name, v] : explained_by) sum += v;
  for (const auto& [name, v] : slope_gaps) sum += v;
  return sum;
}

DicResult decompose_dic(const Dataset& data) {
  const auto& roles = data.roles();
  std::vector<std::string> cols{roles.group};
  for (const auto& c : roles.covariates()) cols.push_back(c);
  const auto y = column_vector(data, roles.outcome);

  const auto without = fit_ols(make_design(data, cols), y);
  const auto mediator_on_group = fit_ols(make_design(data, cols), column_vector(data, roles.mediator));
  cols.push_back(roles.mediator);
  const auto with = fit_ols(make_design(data, cols), y);

  DicResult out;
  out.group_coef_without_mediator = without.coefficient(roles.group);
  out.group_coef_with_mediator = with.coefficient(roles.group);
  out.mediator_coef = with.coefficient(roles.mediator);

  auto& r = out.result;
  r.method = Method::dic;
  r.initial = out.group_coef_without_mediator;
  // Omitted-variable identity: the coefficient change equals the mediator
  // slope times the group coefficient of the mediator regression. Computing
  // it as a product avoids cancellation when the change is zero.
  r.explained = out.mediator_coef * mediator_on_group.coefficient(roles.group);
  r.unexplained = r.initial - r.explained;
  r.proportion_explained_pct = proportion(r.explained, r.initial, data);
  return out;
}

KobResult decompose_kob(const Dataset& data) {
  const auto& roles = data.roles();
  std::vector<std::string> vars = roles.covariates();
  vars.push_back(roles.mediator);

  OlsFit fits[2];
  std::vector<double> means[2];
  double y_mean[2];
  for (int g = 0; g < 2; ++g) {
    const auto rows = data.group_indices(g);
    fits[g] = fit_in_group(make_design(data, vars, rows), column_vector(data, roles.outcome, rows), g);
    for (const auto& v : vars) means[g].push_back(mean_over(data.column(v), rows));
    y_mean[g] = mean_over(data.outcome(), rows);
  }

  KobResult out;
  auto& d = out.detail;
  d.intercept_gap = fits[1].coefficient(kInterceptName) - fits[0].coefficient(kInterceptName);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double b1 = fits[1].coefficient(vars[j]);
    const double b0 = fits[0].coefficient(vars[j]);
    d.explained_by.emplace_back(vars[j], b1 * (means[1][j] - means[0][j]));
    d.slope_gaps.emplace_back(vars[j], (b1 - b0) * means[0][j]);
  }

  auto& r = out.result;
  r.method = Method::kob;
  r.initial = y_mean[1] - y_mean[0];
  r.explained = d.explained_by.back().second;
  r.unexplained = r.initial - r.explained;
  r.proportion_explained_pct = proportion(r.explained, r.initial, data);
  return out;
}

DecompositionResult decompose_cda(const Dataset& data, const CdaSettings& settings) {
  if (settings.mc_draws_per_unit < 1) throw ConfigError("mc_draws_per_unit must be at least 1");

  const auto& roles = data.roles();
  const auto& baseline = roles.baseline;
  const auto& intermediate = roles.intermediate;
  const auto rows0 = data.group_indices(0);
  const auto rows1 = data.group_indices(1);

  // Group 0: mediator and outcome given baseline covariates only.
  const auto base0 = make_design(data, baseline, rows0);
  const auto mediator0 = fit_in_group(base0, column_vector(data, roles.mediator, rows0), 0);
  const auto outcome0 = fit_in_group(base0, column_vector(data, roles.outcome, rows0), 0);

  // Group 1: outcome given baseline, intermediate, mediator (plus products).
  std::vector<std::string> vars1 = baseline;
  vars1.insert(vars1.end(), intermediate.begin(), intermediate.end());
  auto design1 = make_design(data, vars1, rows1);
  const auto m1 = column_vector(data, roles.mediator, rows1);
  const auto k = design1.values.cols();
  design1.names.push_back(roles.mediator);
  design1.values.conservativeResize(Eigen::NoChange, k + 1);
  design1.values.col(k) = m1;
  if (settings.mediator_interactions) {
    design1.values.conservativeResize(Eigen::NoChange, 2 * k + 1);
    for (Eigen::Index j = 0; j < k; ++j) {
      design1.names.push_back(roles.mediator + ":" + vars1[static_cast<std::size_t>(j)]);
      design1.values.col(k + 1 + j) = design1.values.col(j).cwiseProduct(m1);
    }
  }
  const auto outcome1 = fit_in_group(design1, column_vector(data, roles.outcome, rows1), 1);

  // The group-1 model is linear in m for fixed (c, x): g1 = level + slope * m.
  const auto& b = outcome1.coefficients;
  const auto t = static_cast<Eigen::Index>(rows1.size());
  const Eigen::MatrixXd cov1 = design1.values.leftCols(k);
  Eigen::VectorXd level = cov1 * b.segment(1, k);
  level.array() += b[0];
  Eigen::VectorXd slope = Eigen::VectorXd::Constant(t, b[k + 1]);
  if (settings.mediator_interactions) slope += cov1 * b.tail(k);

  const auto base1 = make_design(data, baseline, rows1);
  const Eigen::VectorXd mediator_mean = mediator0.predict(base1.values);
  const Eigen::VectorXd outcome0_at_1 = outcome0.predict(base1.values);

  auto engine = make_stream(settings.seed, 0, StreamTag::cda);
  std::uniform_int_distribution<Eigen::Index> pick(0, mediator0.residuals.size() - 1);
  std::normal_distribution<double> normal;
  const double residual_sd = mediator0.residual_sd;
  const bool empirical = settings.residual_mode == ResidualMode::empirical_resample;

  double counterfactual = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    double draws = 0.0;
    for (int d = 0; d < settings.mc_draws_per_unit; ++d) {
      const double eps = empirical ? mediator0.residuals[pick(engine)] : residual_sd * normal(engine);
      draws += mediator_mean[i] + eps;
    }
    counterfactual += level[i] + slope[i] * (draws / settings.mc_draws_per_unit);
  }
  counterfactual /= static_cast<double>(t);

  const double observed1 = mean_over(data.outcome(), rows1);
  const double reference0 = outcome0_at_1.mean();

  DecompositionResult r;
  r.method = Method::cda;
  r.initial = observed1 - reference0;
  r.explained = observed1 - counterfactual;
  r.unexplained = r.initial - r.explained;
  r.proportion_explained_pct = proportion(r.explained, r.initial, data);
  return r;
}

DecompositionResult decompose(const Dataset& data, Method method, const CdaSettings& settings) {
  switch (method) {
    case Method::dic: return decompose_dic(data).result;
    case Method::kob: return decompose_kob(data).result;
    case Method::cda: return decompose_cda(data, settings);
  }
  throw ConfigError("unknown method");
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EstimationError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // 1e-9 keeps 0.025 * 200 at 5 rather than 5.000000000000001
  auto index = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  index = std::clamp<std::size_t>(index, 1, values.size());
  return values[index - 1];
}

DecompositionResult bootstrap(const Dataset& data, Method method, const CdaSettings& settings,
                              int replicates, std::uint64_t seed, unsigned workers) {
  if (replicates < 2) throw ConfigError("bootstrap needs at least 2 replicates");
  auto point = decompose(data, method, settings);

  const auto rows0 = data.group_indices(0);
  const auto rows1 = data.group_indices(1);
  const auto b_count = static_cast<std::size_t>(replicates);
  const std::size_t max_redraws = 10 * b_count;

  std::vector<DecompositionResult> results(b_count);
  std::vector<std::size_t> redraws(b_count, 0);

  parallel_for(b_count, workers, [&](std::size_t b) {
    for (std::size_t attempt = 0;; ++attempt) {
      auto engine = make_stream(seed, b, StreamTag::bootstrap, attempt);
      std::vector<std::size_t> rows;
      rows.reserve(data.size());
      for (const auto* group : {&rows0, &rows1}) {
        std::uniform_int_distribution<std::size_t> pick(0, group->size() - 1);
        for (std::size_t i = 0; i < group->size(); ++i) rows.push_back((*group)[pick(engine)]);
      }
      CdaSettings s = settings;
      s.seed = engine();
      try {
        results[b] = decompose(data.select_rows(rows), method, s);
        return;
      } catch (const EstimationError&) {
        if (++redraws[b] > max_redraws) return;
      }
    }
  });

  const auto total_redraws = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
  if (total_redraws > max_redraws) {
    std::ostringstream msg;
    msg << "bootstrap failed: " << total_redraws << " resamples broke the " << to_string(method)
        << " estimator (limit " << max_redraws << " for B = " << replicates << ")";
    throw EstimationError(msg.str());
  }

  auto interval = [&](double DecompositionResult::*field) {
    std::vector<double> v;
    v.reserve(b_count);
    for (const auto& r : results) v.push_back(r.*field);
    return Interval{percentile(v, 0.025), percentile(v, 0.975)};
  };
  point.initial_ci = interval(&DecompositionResult::initial);
  point.explained_ci = interval(&DecompositionResult::explained);
  point.unexplained_ci = interval(&DecompositionResult::unexplained);
  return point;
}

}  // namespace disparity
