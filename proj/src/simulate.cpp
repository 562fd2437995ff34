#include "disparity/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "disparity/errors.hpp"
#include "disparity/parallel.hpp"
#include "disparity/random.hpp"

namespace disparity {

namespace {

using nlohmann::json;

// Indices into the augmented vector (R, C, U, X1, X2, X3, M, Y).
enum Var : int { kR = 0, kC, kU, kX1, kX2, kX3, kM, kY, kVarCount };
constexpr int kNoiseCount = 7;  // eC, U, eX1, eX2, eX3, eM, eY

constexpr std::array<std::string_view, 7> kScenarioTags{"none",    "c-only",  "x-only", "cx",
                                                        "xm-conf", "my-conf", "both"};

// ---------------------------------------------------------------------------
// Population projections on implied moments

struct Projection {
  Eigen::VectorXd slopes;
  double residual_variance = 0.0;
};

Projection project(const Eigen::MatrixXd& cov, int target, const std::vector<int>& regressors) {
  const auto k = static_cast<Eigen::Index>(regressors.size());
  Eigen::MatrixXd sxx(k, k);
  Eigen::VectorXd sxy(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sxy[i] = cov(regressors[i], target);
    for (Eigen::Index j = 0; j < k; ++j) sxx(i, j) = cov(regressors[i], regressors[j]);
  }
  Projection p;
  if (k == 0) {
    p.slopes.resize(0);
    p.residual_variance = cov(target, target);
    return p;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(k, k);
  qr.setThreshold(1e-12);
  qr.compute(sxx);
  if (qr.rank() < k) throw ConfigError("singular implied design covariance");
  p.slopes = qr.solve(sxy);
  p.residual_variance = cov(target, target) - sxy.dot(p.slopes);
  return p;
}

double slope_of(const Projection& p, const std::vector<int>& regressors, int var) {
  const auto it = std::find(regressors.begin(), regressors.end(), var);
  return p.slopes[it - regressors.begin()];
}

std::vector<int> observed_covariates(Scenario s) {
  std::vector<int> out;
  if (has_baseline(s)) out.push_back(kC);
  if (has_intermediate(s)) out.insert(out.end(), {kX1, kX2, kX3});
  return out;
}

std::vector<int> with(std::vector<int> vars, std::initializer_list<int> extra) {
  vars.insert(vars.end(), extra);
  return vars;
}

std::vector<int> prepend_r(const std::vector<int>& vars) {
  std::vector<int> out{kR};
  out.insert(out.end(), vars.begin(), vars.end());
  return out;
}

// Within-group covariance embedded in the augmented index space (R row zero).
Eigen::MatrixXd augmented_within(const SemMoments& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kVarCount, kVarCount);
  out.bottomRightCorner(kVarCount - 1, kVarCount - 1) = m.within;
  return out;
}

double group_gap(const SemMoments& m, int var) { return m.mean1[var - 1] - m.mean0[var - 1]; }

// Gap in `var` after standardizing to group 1's C distribution.
double c_standardized_gap(const SemMoments& m, const Eigen::MatrixXd& within, Scenario s, int var) {
  double gap = group_gap(m, var);
  if (has_baseline(s)) gap -= project(within, var, {kC}).slopes[0] * group_gap(m, kC);
  return gap;
}

Triple dic_target(const Eigen::MatrixXd& pooled, Scenario s, bool with_u) {
  auto base = prepend_r(observed_covariates(s));
  if (with_u) base.push_back(kU);
  const auto full = with(base, {kM});
  Triple t;
  t.initial = slope_of(project(pooled, kY, base), base, kR);
  t.unexplained = slope_of(project(pooled, kY, full), full, kR);
  t.explained = t.initial - t.unexplained;
  return t;
}

Triple kob_target(const SemMoments& m, const Eigen::MatrixXd& within, Scenario s, bool with_u) {
  auto regs = observed_covariates(s);
  if (with_u) regs.push_back(kU);
  regs.push_back(kM);
  const double mediator_slope = slope_of(project(within, kY, regs), regs, kM);
  Triple t;
  t.initial = group_gap(m, kY);
  t.explained = mediator_slope * group_gap(m, kM);
  t.unexplained = t.initial - t.explained;
  return t;
}

Triple cda_target(const SemMoments& m, const Eigen::MatrixXd& within, Scenario s,
                  double mediator_slope) {
  Triple t;
  t.initial = c_standardized_gap(m, within, s, kY);
  t.explained = mediator_slope * c_standardized_gap(m, within, s, kM);
  t.unexplained = t.initial - t.explained;
  return t;
}

// ---------------------------------------------------------------------------
// JSON config

template <typename T>
void read_field(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key \"" + key + "\" in " + std::string(where));
    }
  }
}

void read_coefficients(const json& j, SemCoefficients& c) {
  reject_unknown(j, {"p_r", "c", "x", "m", "y"}, "coefficients");
  read_field(j, "p_r", c.p_r);
  if (j.contains("c")) {
    const auto& o = j.at("c");
    reject_unknown(o, {"intercept", "on_r", "noise_sd"}, "coefficients.c");
    read_field(o, "intercept", c.c.intercept);
    read_field(o, "on_r", c.c.on_r);
    read_field(o, "noise_sd", c.c.noise_sd);
  }
  if (j.contains("x")) {
    const auto& arr = j.at("x");
    if (!arr.is_array() || arr.size() != 3) throw ConfigError("coefficients.x must list 3 equations");
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& o = arr[k];
      reject_unknown(o, {"intercept", "on_r", "on_c", "on_u", "noise_sd"}, "coefficients.x");
      read_field(o, "intercept", c.x[k].intercept);
      read_field(o, "on_r", c.x[k].on_r);
      read_field(o, "on_c", c.x[k].on_c);
      read_field(o, "on_u", c.x[k].on_u);
      read_field(o, "noise_sd", c.x[k].noise_sd);
    }
  }
  if (j.contains("m")) {
    const auto& o = j.at("m");
    reject_unknown(o, {"intercept", "on_r", "on_c", "on_x", "on_u", "noise_sd"}, "coefficients.m");
    read_field(o, "intercept", c.m.intercept);
    read_field(o, "on_r", c.m.on_r);
    read_field(o, "on_c", c.m.on_c);
    read_field(o, "on_x", c.m.on_x);
    read_field(o, "on_u", c.m.on_u);
    read_field(o, "noise_sd", c.m.noise_sd);
  }
  if (j.contains("y")) {
    const auto& o = j.at("y");
    reject_unknown(o, {"intercept", "on_r", "on_c", "on_x", "on_m", "on_u", "noise_sd"},
                   "coefficients.y");
    read_field(o, "intercept", c.y.intercept);
    read_field(o, "on_r", c.y.on_r);
    read_field(o, "on_c", c.y.on_c);
    read_field(o, "on_x", c.y.on_x);
    read_field(o, "on_m", c.y.on_m);
    read_field(o, "on_u", c.y.on_u);
    read_field(o, "noise_sd", c.y.noise_sd);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenarios

std::string_view to_string(Scenario s) noexcept { return kScenarioTags[static_cast<std::size_t>(s)]; }

Scenario parse_scenario(std::string_view tag) {
  for (auto s : all_scenarios()) {
    if (to_string(s) == tag) return s;
  }
  throw ConfigError("unknown scenario " + std::string(tag) +
                    " (expected none, c-only, x-only, cx, xm-conf, my-conf, both)");
}

const std::array<Scenario, 7>& all_scenarios() noexcept {
  static constexpr std::array<Scenario, 7> kAll{Scenario::none,    Scenario::c_only,
                                                Scenario::x_only,  Scenario::cx,
                                                Scenario::xm_conf, Scenario::my_conf,
                                                Scenario::both};
  return kAll;
}

bool has_baseline(Scenario s) noexcept { return s != Scenario::none && s != Scenario::x_only; }
bool has_intermediate(Scenario s) noexcept { return s != Scenario::none && s != Scenario::c_only; }
bool allows_u_on_x(Scenario s) noexcept { return s == Scenario::xm_conf || s == Scenario::both; }
bool allows_u_on_m(Scenario s) noexcept {
  return s == Scenario::xm_conf || s == Scenario::my_conf || s == Scenario::both;
}
bool allows_u_on_y(Scenario s) noexcept { return s == Scenario::my_conf || s == Scenario::both; }

SemCoefficients SemCoefficients::defaults(Scenario s) {
  SemCoefficients c;
  if (allows_u_on_x(s)) {
    for (auto& eq : c.x) eq.on_u = kDefaultUOnX;
  }
  if (allows_u_on_m(s)) c.m.on_u = kDefaultUOnM;
  if (allows_u_on_y(s)) c.y.on_u = kDefaultUOnY;
  return c;
}

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  cfg.coefficients = SemCoefficients::defaults(s);
  return cfg;
}

void ScenarioConfig::validate() const {
  if (n < 50) throw ConfigError("n must be at least 50");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  const auto& c = coefficients;
  if (!(c.p_r > 0.0 && c.p_r < 1.0)) throw ConfigError("p_r must lie in (0, 1)");
  auto positive = [](double sd, const char* what) {
    if (!(sd > 0.0)) throw ConfigError(std::string(what) + " noise_sd must be positive");
  };
  positive(c.c.noise_sd, "c");
  for (const auto& eq : c.x) positive(eq.noise_sd, "x");
  positive(c.m.noise_sd, "m");
  positive(c.y.noise_sd, "y");
  const std::string tag(to_string(scenario));
  for (const auto& eq : c.x) {
    if (eq.on_u != 0.0 && !allows_u_on_x(scenario)) {
      throw ConfigError("scenario " + tag + " does not allow U -> X (x.on_u must be 0)");
    }
  }
  if (c.m.on_u != 0.0 && !allows_u_on_m(scenario)) {
    throw ConfigError("scenario " + tag + " does not allow U -> M (m.on_u must be 0)");
  }
  if (c.y.on_u != 0.0 && !allows_u_on_y(scenario)) {
    throw ConfigError("scenario " + tag + " does not allow U -> Y (y.on_u must be 0)");
  }
}

ScenarioConfig config_from_json(std::string_view text, std::optional<Scenario> scenario_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario JSON must be an object");
  try {
    reject_unknown(j, {"scenario", "n", "reps", "seed", "coefficients"}, "scenario config");
    Scenario s = Scenario::none;
    if (scenario_override) {
      s = *scenario_override;
    } else if (j.contains("scenario")) {
      s = parse_scenario(j.at("scenario").get<std::string>());
    } else {
      throw ConfigError("scenario config needs a \"scenario\" tag");
    }
    auto cfg = ScenarioConfig::defaults(s);
    read_field(j, "n", cfg.n);
    read_field(j, "reps", cfg.reps);
    read_field(j, "seed", cfg.seed);
    if (j.contains("coefficients")) read_coefficients(j.at("coefficients"), cfg.coefficients);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario config: ") + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path,
                           std::optional<Scenario> scenario_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str(), scenario_override);
}

std::string config_to_json(const ScenarioConfig& cfg) {
  const auto& c = cfg.coefficients;
  json x = json::array();
  for (const auto& eq : c.x) {
    x.push_back({{"intercept", eq.intercept},
                 {"on_r", eq.on_r},
                 {"on_c", eq.on_c},
                 {"on_u", eq.on_u},
                 {"noise_sd", eq.noise_sd}});
  }
  json j = {
      {"scenario", std::string(to_string(cfg.scenario))},
      {"n", cfg.n},
      {"reps", cfg.reps},
      {"seed", cfg.seed},
      {"coefficients",
       {{"p_r", c.p_r},
        {"c", {{"intercept", c.c.intercept}, {"on_r", c.c.on_r}, {"noise_sd", c.c.noise_sd}}},
        {"x", x},
        {"m",
         {{"intercept", c.m.intercept},
          {"on_r", c.m.on_r},
          {"on_c", c.m.on_c},
          {"on_x", c.m.on_x},
          {"on_u", c.m.on_u},
          {"noise_sd", c.m.noise_sd}}},
        {"y",
         {{"intercept", c.y.intercept},
          {"on_r", c.y.on_r},
          {"on_c", c.y.on_c},
          {"on_x", c.y.on_x},
          {"on_m", c.y.on_m},
          {"on_u", c.y.on_u},
          {"noise_sd", c.y.noise_sd}}}}}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Generation

Dataset generate(const ScenarioConfig& config, std::size_t rep_index, bool include_latent) {
  config.validate();
  const auto s = config.scenario;
  const auto& k = config.coefficients;
  const bool use_c = has_baseline(s);
  const bool use_x = has_intermediate(s);
  const std::size_t n = config.n;

  std::vector<double> r(n), c(n), u(n), m(n), y(n);
  std::array<std::vector<double>, 3> x;
  for (auto& col : x) col.resize(n);

  auto engine = make_stream(config.seed, rep_index, StreamTag::generate);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> z;

  for (std::size_t i = 0; i < n; ++i) {
    // Every unit consumes the same draws in the same order, whatever the scenario.
    const double ri = uniform(engine) < k.p_r ? 1.0 : 0.0;
    const double e_c = z(engine);
    const double ui = z(engine);
    std::array<double, 3> e_x{};
    for (auto& e : e_x) e = z(engine);
    const double e_m = z(engine);
    const double e_y = z(engine);

    const double ci = use_c ? k.c.intercept + k.c.on_r * ri + k.c.noise_sd * e_c : 0.0;
    std::array<double, 3> xi{};
    for (std::size_t j = 0; j < 3 && use_x; ++j) {
      const auto& eq = k.x[j];
      xi[j] = eq.intercept + eq.on_r * ri + eq.on_c * ci + eq.on_u * ui + eq.noise_sd * e_x[j];
    }
    double mi = k.m.intercept + k.m.on_r * ri + k.m.on_c * ci + k.m.on_u * ui + k.m.noise_sd * e_m;
    double yi = k.y.intercept + k.y.on_r * ri + k.y.on_c * ci + k.y.on_u * ui + k.y.noise_sd * e_y;
    for (std::size_t j = 0; j < 3; ++j) mi += k.m.on_x[j] * xi[j];
    for (std::size_t j = 0; j < 3; ++j) yi += k.y.on_x[j] * xi[j];
    yi += k.y.on_m * mi;

    r[i] = ri;
    c[i] = ci;
    u[i] = ui;
    for (std::size_t j = 0; j < 3; ++j) x[j][i] = xi[j];
    m[i] = mi;
    y[i] = yi;
  }

  RoleSpec roles{"R", "Y", "M", {}, {}};
  std::vector<std::string> names{"R"};
  std::vector<std::vector<double>> cols{std::move(r)};
  if (use_c) {
    roles.baseline = {"C"};
    names.emplace_back("C");
    cols.push_back(std::move(c));
  }
  if (use_x) {
    roles.intermediate = {"X1", "X2", "X3"};
    for (std::size_t j = 0; j < 3; ++j) {
      names.push_back("X" + std::to_string(j + 1));
      cols.push_back(std::move(x[j]));
    }
  }
  names.emplace_back("M");
  cols.push_back(std::move(m));
  names.emplace_back("Y");
  cols.push_back(std::move(y));
  if (include_latent) {
    names.emplace_back("U");
    cols.push_back(std::move(u));
  }
  return Dataset(std::move(names), std::move(cols), std::move(roles));
}

// ---------------------------------------------------------------------------
// Moments and truths

Eigen::VectorXd SemMoments::pooled_mean() const {
  Eigen::VectorXd out(kVarCount);
  out[kR] = p_r;
  out.tail(kVarCount - 1) = (1.0 - p_r) * mean0 + p_r * mean1;
  return out;
}

Eigen::MatrixXd SemMoments::pooled_cov() const {
  const double var_r = p_r * (1.0 - p_r);
  Eigen::VectorXd shift(kVarCount);
  shift[kR] = 1.0;
  shift.tail(kVarCount - 1) = mean1 - mean0;
  Eigen::MatrixXd out = var_r * shift * shift.transpose();
  out.bottomRightCorner(kVarCount - 1, kVarCount - 1) += within;
  return out;
}

SemMoments propagate_moments(const ScenarioConfig& config) {
  config.validate();
  const auto s = config.scenario;
  const auto& k = config.coefficients;

  // Each variable is constant + on_r * R + loadings . (eC, U, eX1, eX2, eX3, eM, eY).
  struct Affine {
    double constant = 0.0;
    double on_r = 0.0;
    Eigen::VectorXd load = Eigen::VectorXd::Zero(kNoiseCount);
  };
  auto combine = [](Affine& target, const Affine& source, double weight) {
    target.constant += weight * source.constant;
    target.on_r += weight * source.on_r;
    target.load += weight * source.load;
  };

  Affine c, u, m, y;
  std::array<Affine, 3> x;
  u.load[1] = 1.0;
  if (has_baseline(s)) {
    c.constant = k.c.intercept;
    c.on_r = k.c.on_r;
    c.load[0] = k.c.noise_sd;
  }
  if (has_intermediate(s)) {
    for (std::size_t j = 0; j < 3; ++j) {
      x[j].constant = k.x[j].intercept;
      x[j].on_r = k.x[j].on_r;
      combine(x[j], c, k.x[j].on_c);
      combine(x[j], u, k.x[j].on_u);
      x[j].load[2 + static_cast<Eigen::Index>(j)] += k.x[j].noise_sd;
    }
  }
  m.constant = k.m.intercept;
  m.on_r = k.m.on_r;
  combine(m, c, k.m.on_c);
  combine(m, u, k.m.on_u);
  for (std::size_t j = 0; j < 3; ++j) combine(m, x[j], k.m.on_x[j]);
  m.load[5] += k.m.noise_sd;

  y.constant = k.y.intercept;
  y.on_r = k.y.on_r;
  combine(y, c, k.y.on_c);
  combine(y, u, k.y.on_u);
  for (std::size_t j = 0; j < 3; ++j) combine(y, x[j], k.y.on_x[j]);
  combine(y, m, k.y.on_m);
  y.load[6] += k.y.noise_sd;

  const std::array<const Affine*, 7> vars{&c, &u, &x[0], &x[1], &x[2], &m, &y};
  SemMoments out;
  out.p_r = k.p_r;
  out.mean0.resize(7);
  out.mean1.resize(7);
  Eigen::MatrixXd loads(7, kNoiseCount);
  for (std::size_t v = 0; v < 7; ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    out.mean0[i] = vars[v]->constant;
    out.mean1[i] = vars[v]->constant + vars[v]->on_r;
    loads.row(i) = vars[v]->load.transpose();
  }
  out.within = loads * loads.transpose();
  return out;
}

const Triple& TrueValues::of(Method m) const {
  switch (m) {
    case Method::dic: return dic;
    case Method::kob: return kob;
    case Method::cda: return cda;
  }
  throw ConfigError("unknown method");
}

TrueValues compute_truths(const ScenarioConfig& config) {
  const auto moments = propagate_moments(config);
  const auto pooled = moments.pooled_cov();
  const auto within = augmented_within(moments);
  const auto s = config.scenario;

  TrueValues t;
  t.dic = dic_target(pooled, s, true);
  t.kob = kob_target(moments, within, s, true);
  t.cda = cda_target(moments, within, s, config.coefficients.y.on_m);
  return t;
}

TrueValues estimator_limits(const ScenarioConfig& config) {
  const auto moments = propagate_moments(config);
  const auto pooled = moments.pooled_cov();
  const auto within = augmented_within(moments);
  const auto s = config.scenario;

  // The CDA estimator's mediator effect is the group-1 regression slope without U.
  const auto regs = with(observed_covariates(s), {kM});
  const double naive_slope = slope_of(project(within, kY, regs), regs, kM);

  TrueValues t;
  t.dic = dic_target(pooled, s, false);
  t.kob = kob_target(moments, within, s, false);
  t.cda = cda_target(moments, within, s, naive_slope);
  return t;
}

double c_pathway_contribution(const ScenarioConfig& config) {
  if (!has_baseline(config.scenario)) return 0.0;
  const auto& k = config.coefficients;
  const bool use_x = has_intermediate(config.scenario);
  // Total effect of C on M and on Y, summed over directed paths.
  double c_to_m = k.m.on_c;
  double c_to_y = k.y.on_c;
  for (std::size_t j = 0; j < 3 && use_x; ++j) {
    c_to_m += k.x[j].on_c * k.m.on_x[j];
    c_to_y += k.x[j].on_c * k.y.on_x[j];
  }
  c_to_y += c_to_m * k.y.on_m;
  return k.c.on_r * c_to_y;
}

double x_pathway_contribution(const ScenarioConfig& config) {
  if (!has_intermediate(config.scenario)) return 0.0;
  const auto& k = config.coefficients;
  double total = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    total += k.x[j].on_r * (k.y.on_x[j] + k.m.on_x[j] * k.y.on_m);
  }
  return total;
}

SensitivityParams oracle_sensitivity_params(const ScenarioConfig& config) {
  const auto pooled = propagate_moments(config).pooled_cov();
  const auto mediator_regs = prepend_r(observed_covariates(config.scenario));
  const auto outcome_regs = with(mediator_regs, {kM});

  auto partial = [&](int target, const std::vector<int>& regs) {
    const double reduced = project(pooled, target, regs).residual_variance;
    const double full = project(pooled, target, with(regs, {kU})).residual_variance;
    return std::clamp(1.0 - full / reduced, 0.0, 1.0 - 1e-15);
  };

  SensitivityParams p;
  p.r2_yu = partial(kY, outcome_regs);
  p.r2_mu = partial(kM, mediator_regs);

  const auto y_full = with(outcome_regs, {kU});
  const double u_on_y = slope_of(project(pooled, kY, y_full), y_full, kU);
  // the partial slope has the sign of Cov(U, M | R, C, X)
  const auto m_full = with(mediator_regs, {kU});
  const double u_on_m = slope_of(project(pooled, kM, m_full), m_full, kU);
  p.sign = u_on_y * u_on_m < 0.0 ? -1 : +1;
  return p;
}

// ---------------------------------------------------------------------------
// Harness

const MethodSummary& SimulationReport::method(std::string_view label) const {
  for (const auto& m : methods) {
    if (m.label == label) return m;
  }
  throw ConfigError("report has no method " + std::string(label));
}

namespace {

QuantitySummary summarize(const std::vector<double>& values, double truth) {
  QuantitySummary q;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  q.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - q.mean) * (v - q.mean);
    q.mc_se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  q.lower = percentile(values, 0.025);
  q.upper = percentile(values, 0.975);
  q.truth = truth;
  q.covered = q.lower <= truth && truth <= q.upper;
  return q;
}

MethodSummary summarize_method(std::string label, const std::vector<Triple>& rows,
                               const Triple& truth) {
  std::vector<double> a, b, c;
  for (const auto& t : rows) {
    a.push_back(t.initial);
    b.push_back(t.explained);
    c.push_back(t.unexplained);
  }
  return {std::move(label), summarize(a, truth.initial), summarize(b, truth.explained),
          summarize(c, truth.unexplained)};
}

Triple as_triple(const DecompositionResult& r) { return {r.initial, r.explained, r.unexplained}; }

}  // namespace

SimulationReport run_harness(const ScenarioConfig& config, const HarnessOptions& options) {
  config.validate();
  if (options.mc_draws_per_unit < 1) throw ConfigError("mc_draws_per_unit must be at least 1");

  const std::set<Method> wanted(options.methods.begin(), options.methods.end());
  const bool need_cda = wanted.count(Method::cda) > 0 || options.oracle_sensitivity;
  const auto oracle = options.oracle_sensitivity ? oracle_sensitivity_params(config)
                                                 : SensitivityParams{};

  SimulationReport report;
  report.config = config;
  report.truths = compute_truths(config);
  report.interval_unreliable = config.reps < 20;
  report.replicates.resize(config.reps);

  parallel_for(config.reps, options.workers, [&](std::size_t rep) {
    try {
      const auto data = generate(config, rep);
      auto& est = report.replicates[rep];
      if (wanted.count(Method::dic)) est.dic = decompose_dic(data).result;
      if (wanted.count(Method::kob)) est.kob = decompose_kob(data).result;
      if (need_cda) {
        CdaSettings settings;
        settings.mc_draws_per_unit = options.mc_draws_per_unit;
        settings.residual_mode = options.residual_mode;
        settings.seed = make_stream(config.seed, rep, StreamTag::cda)();
        est.cda = decompose_cda(data, settings);
        if (options.oracle_sensitivity) est.adjusted = adjust(*est.cda, data, oracle);
      }
    } catch (const std::exception& e) {
      throw EstimationError("replication " + std::to_string(rep) + ": " + e.what());
    }
  });

  auto collect = [&](auto getter) {
    std::vector<Triple> rows;
    rows.reserve(config.reps);
    for (const auto& r : report.replicates) rows.push_back(getter(r));
    return rows;
  };
  for (auto m : {Method::dic, Method::kob, Method::cda}) {
    if (!wanted.count(m)) continue;
    const auto rows = collect([m](const ReplicateEstimates& r) {
      const auto& res = m == Method::dic ? r.dic : m == Method::kob ? r.kob : r.cda;
      return as_triple(*res);
    });
    report.methods.push_back(summarize_method(std::string(to_string(m)), rows, report.truths.of(m)));
  }
  if (options.oracle_sensitivity) {
    const auto rows = collect([](const ReplicateEstimates& r) {
      return Triple{r.adjusted->tau, r.adjusted->delta_adjusted, r.adjusted->zeta_adjusted};
    });
    report.methods.push_back(summarize_method("Adj. CDA", rows, report.truths.cda));
  }
  return report;
}

}  // namespace disparity
