#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "disparity/regress.hpp"
#include "disparity/simulate.hpp"
#include "disparity/tabular.hpp"

namespace testing {

using disparity::Dataset;
using disparity::RoleSpec;

inline RoleSpec roles(std::vector<std::string> baseline = {}, std::vector<std::string> intermediate = {}) {
  return RoleSpec{"R", "Y", "M", std::move(baseline), std::move(intermediate)};
}

/// Columns R, M, Y.
inline Dataset rmy(std::vector<double> r, std::vector<double> m, std::vector<double> y) {
  return Dataset({"R", "M", "Y"}, {std::move(r), std::move(m), std::move(y)}, roles());
}

/// Columns R, C, M, Y with C as baseline.
inline Dataset rcmy(std::vector<double> r, std::vector<double> c, std::vector<double> m,
                    std::vector<double> y) {
  return Dataset({"R", "C", "M", "Y"}, {std::move(r), std::move(c), std::move(m), std::move(y)},
                 roles({"C"}));
}

/// Random linear data with baseline C, intermediate X and arbitrary coefficients.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n_per_group = 60) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  const double a[] = {coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), coef(rng),
                      coef(rng), coef(rng)};
  std::vector<double> r, c, x, m, y;
  for (std::size_t i = 0; i < 2 * n_per_group; ++i) {
    const double ri = i < n_per_group ? 0.0 : 1.0;
    const double ci = a[0] * ri + z(rng);
    const double xi = a[1] * ri + a[2] * ci + z(rng);
    const double mi = 1.0 + a[3] * ri + a[4] * ci + a[5] * xi + z(rng);
    const double yi = a[6] * ri + a[7] * ci + 0.3 * xi + a[8] * mi + 0.5 * ri * mi + z(rng);
    r.push_back(ri);
    c.push_back(ci);
    x.push_back(xi);
    m.push_back(mi);
    y.push_back(yi);
  }
  return Dataset({"R", "C", "X", "M", "Y"}, {r, c, x, m, y}, roles({"C"}, {"X"}));
}

inline Dataset with_columns(const Dataset& d, std::vector<std::vector<double>> columns) {
  return Dataset(d.column_names(), std::move(columns), d.roles());
}

/// Sample Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Partial correlation of variables i and j given `given`, by the recursive
/// correlation formula over a list of variables.
inline double partial_correlation(const std::vector<std::vector<double>>& vars, std::size_t i,
                                  std::size_t j, std::vector<std::size_t> given) {
  if (given.empty()) return correlation(vars[i], vars[j]);
  const std::size_t k = given.back();
  given.pop_back();
  const double rij = partial_correlation(vars, i, j, given);
  const double rik = partial_correlation(vars, i, k, given);
  const double rjk = partial_correlation(vars, j, k, given);
  return (rij - rik * rjk) / std::sqrt((1 - rik * rik) * (1 - rjk * rjk));
}

/// Population targets estimated by brute-force simulation of the structural
/// equations, independent of the moment algebra in the library.
///
/// Every unit is simulated in both worlds with shared noise (R = 1 and R = 0),
/// plus an independent mediator draw from the R = 0 mediator equation at the
/// unit's R = 1 baseline covariate. DIC and KOB projections are ordinary
/// least squares on the simulated data with U included as a regressor.
inline disparity::TrueValues brute_force_truths(const disparity::ScenarioConfig& cfg, std::size_t n,
                                                std::uint64_t seed) {
  using disparity::Scenario;
  const auto& k = cfg.coefficients;
  const bool has_c = disparity::has_baseline(cfg.scenario);
  const bool has_x = disparity::has_intermediate(cfg.scenario);

  struct Unit {
    double c, u, x[3], m, y;
  };
  struct Noise {
    double ec, u, ex[3], em, ey;
  };
  auto world = [&](double r, const Noise& e, const double* c_fixed, const double* m_fixed) {
    Unit w{};
    w.c = has_c ? (c_fixed ? *c_fixed : k.c.intercept + k.c.on_r * r + k.c.noise_sd * e.ec) : 0.0;
    w.u = e.u;
    double m = k.m.intercept + k.m.on_r * r + k.m.on_c * w.c + k.m.on_u * w.u + k.m.noise_sd * e.em;
    double y = k.y.intercept + k.y.on_r * r + k.y.on_c * w.c + k.y.on_u * w.u + k.y.noise_sd * e.ey;
    for (int j = 0; j < 3; ++j) {
      const auto& xj = k.x[static_cast<std::size_t>(j)];
      w.x[j] = has_x ? xj.intercept + xj.on_r * r + xj.on_c * w.c + xj.on_u * w.u + xj.noise_sd * e.ex[j]
                     : 0.0;
      m += k.m.on_x[static_cast<std::size_t>(j)] * w.x[j];
      y += k.y.on_x[static_cast<std::size_t>(j)] * w.x[j];
    }
    w.m = m_fixed ? *m_fixed : m;
    w.y = y + k.y.on_m * w.m;
    return w;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(k.p_r);
  auto draw = [&] {
    Noise e{};
    e.ec = z(rng);
    e.u = z(rng);
    for (double& v : e.ex) v = z(rng);
    e.em = z(rng);
    e.ey = z(rng);
    return e;
  };

  std::vector<std::string> cov_names;
  if (has_c) cov_names.push_back("C");
  if (has_x) cov_names.insert(cov_names.end(), {"X1", "X2", "X3"});
  auto row = [&](const Unit& w, double r, bool with_r, bool with_m) {
    std::vector<double> v;
    if (with_r) v.push_back(r);
    if (has_c) v.push_back(w.c);
    if (has_x) v.insert(v.end(), {w.x[0], w.x[1], w.x[2]});
    v.push_back(w.u);
    if (with_m) v.push_back(w.m);
    return v;
  };
  const std::size_t p_pooled = 1 + cov_names.size() + 1;
  Eigen::MatrixXd pooled(n, p_pooled + 1), group1(n, cov_names.size() + 2);
  Eigen::VectorXd y_pooled(n), y_group1(n);

  double sum_y_gap = 0, sum_m_gap = 0, sum_tau = 0, sum_delta = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Noise e = draw();
    const Noise e_cf = draw();
    const double r = coin(rng) ? 1.0 : 0.0;

    const Unit w1 = world(1.0, e, nullptr, nullptr);
    const Unit w0 = world(0.0, e, nullptr, nullptr);
    sum_y_gap += w1.y - w0.y;
    sum_m_gap += w1.m - w0.m;

    // Group-0 outcome at group-1 baseline covariate.
    const Unit w0_at_c1 = world(0.0, e, &w1.c, nullptr);
    sum_tau += w1.y - w0_at_c1.y;
    // Mediator drawn from the group-0 mediator distribution at that covariate.
    const double m_cf = world(0.0, e_cf, &w1.c, nullptr).m;
    const Unit w1_cf = world(1.0, e, nullptr, &m_cf);
    sum_delta += w1.y - w1_cf.y;

    const Unit& wf = r == 1.0 ? w1 : w0;
    const auto pr = row(wf, r, true, true);
    for (std::size_t j = 0; j < pr.size(); ++j) pooled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pr[j];
    y_pooled(static_cast<Eigen::Index>(i)) = wf.y;
    const auto gr = row(w1, 1.0, false, true);
    for (std::size_t j = 0; j < gr.size(); ++j) group1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gr[j];
    y_group1(static_cast<Eigen::Index>(i)) = w1.y;
  }
  const double nd = static_cast<double>(n);

  std::vector<std::string> pooled_names{"R"};
  pooled_names.insert(pooled_names.end(), cov_names.begin(), cov_names.end());
  pooled_names.push_back("U");
  auto with_m_names = pooled_names;
  with_m_names.push_back("M");
  const auto without_m =
      disparity::fit_ols({pooled_names, pooled.leftCols(static_cast<Eigen::Index>(p_pooled))}, y_pooled);
  const auto with_m = disparity::fit_ols({with_m_names, pooled}, y_pooled);

  auto g1_names = cov_names;
  g1_names.push_back("U");
  g1_names.push_back("M");
  const auto g1 = disparity::fit_ols({g1_names, group1}, y_group1);

  disparity::TrueValues t;
  t.dic.initial = without_m.coefficient("R");
  t.dic.unexplained = with_m.coefficient("R");
  t.dic.explained = t.dic.initial - t.dic.unexplained;
  t.kob.initial = sum_y_gap / nd;
  t.kob.explained = g1.coefficient("M") * sum_m_gap / nd;
  t.kob.unexplained = t.kob.initial - t.kob.explained;
  t.cda.initial = sum_tau / nd;
  t.cda.explained = sum_delta / nd;
  t.cda.unexplained = t.cda.initial - t.cda.explained;
  return t;
}

}  // namespace testing
