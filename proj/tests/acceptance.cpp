#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "disparity/decompose.hpp"
#include "disparity/errors.hpp"
#include "disparity/render.hpp"
#include "disparity/sensitivity.hpp"
#include "disparity/simulate.hpp"
#include "support.hpp"

using namespace disparity;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED: " << what << ';';
    }
  }
};

/// Default-suite reports, each run once single-threaded and timed.
struct Suite {
  std::map<Scenario, SimulationReport> reports;
  std::map<Scenario, double> seconds;

  const SimulationReport& get(Scenario s) {
    if (!reports.contains(s)) {
      HarnessOptions options;
      options.oracle_sensitivity = true;
      options.workers = 1;
      const auto start = Clock::now();
      reports.emplace(s, run_harness(ScenarioConfig::defaults(s), options));
      seconds[s] = seconds_since(start);
    }
    return reports.at(s);
  }
};

double mc_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0) / n);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string fmt(double v) { return format_number(v); }

Outcome exact_identities() {
  Outcome o;
  const auto start = Clock::now();
  double worst_kob = 0.0, worst_cda = 0.0, worst_adj = 0.0;
  bool tau_kept = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto d = testing::random_dataset(seed);
    const auto kob = decompose_kob(d);
    const double scale = std::max(1.0, std::abs(kob.result.initial));
    const auto g = group_means(d);
    const double raw_gap = g.of("Y", 1) - g.of("Y", 0);
    worst_kob = std::max({worst_kob, std::abs(kob.detail.total() - raw_gap) / scale,
                          std::abs(kob.result.explained + kob.result.unexplained - raw_gap) / scale});

    CdaSettings s;
    s.seed = seed;
    s.mc_draws_per_unit = 20;
    const auto cda = decompose_cda(d, s);
    worst_cda = std::max(worst_cda, std::abs(cda.explained + cda.unexplained - cda.initial));

    const auto inputs = sensitivity_inputs(d);
    for (double yu : {0.0, 0.1, 0.4}) {
      for (double mu : {0.0, 0.2, 0.6}) {
        const auto a = adjust(cda, inputs, {yu, mu, seed % 2 ? +1 : -1});
        tau_kept = tau_kept && a.tau == cda.initial;
        worst_adj = std::max(worst_adj, std::abs(a.delta_adjusted + a.zeta_adjusted - cda.initial));
      }
    }
  }
  const auto orth = testing::rmy({0, 0, 1, 1}, {-1, 1, -1, 1}, {-1, 1, 0, 2});
  const double orth_explained = decompose_dic(orth).result.explained;
  const double elapsed = seconds_since(start);

  o.require(worst_kob <= 1e-10, "KOB additivity");
  o.require(worst_cda <= 1e-12, "CDA additivity");
  o.require(tau_kept && worst_adj <= 1e-12, "sensitivity additivity");
  o.require(orth_explained == 0.0, "DIC orthogonal mediator");
  o.require(elapsed < 1.0, "runtime");
  o.detail << " KOB rel err " << fmt(worst_kob) << ", CDA err " << fmt(worst_cda) << ", adjusted err "
           << fmt(worst_adj) << ", DIC orthogonal explained " << fmt(orth_explained) << ", " << fmt(elapsed)
           << " s";
  return o;
}

Outcome worked_examples() {
  Outcome o;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  const auto dic = decompose_dic(testing::rmy({0, 0, 1, 1}, {0, 1, 1, 2}, {0, 2, 3, 5})).result;
  o.require(close(dic.initial, 3) && close(dic.explained, 2) && dic.proportion_explained_pct &&
                close(*dic.proportion_explained_pct, 200.0 / 3.0),
            "DIC");
  const auto kob = decompose_kob(testing::rmy({1, 1, 1, 0, 0, 0}, {2, 4, 3, 1, 3, 2}, {5, 9, 7, 1, 3, 2})).result;
  o.require(close(kob.initial, 5) && close(kob.explained, 2) && close(kob.unexplained, 3), "KOB");
  const auto cda = decompose_cda(testing::rmy({1, 1, 1, 0, 0}, {0, 2, 1, 2, 2}, {0, 2, 1, 2, 2}));
  o.require(close(cda.initial, -1) && close(cda.explained, -1) && close(cda.unexplained, 0), "CDA");
  o.detail << " DIC " << fmt(dic.initial) << "/" << fmt(dic.explained) << "/"
           << fmt(dic.proportion_explained_pct.value_or(NAN)) << "%, KOB " << fmt(kob.initial) << "/"
           << fmt(kob.explained) << "/" << fmt(kob.unexplained) << ", CDA " << fmt(cda.initial) << "/"
           << fmt(cda.explained) << "/" << fmt(cda.unexplained);
  return o;
}

Outcome oracle_cross_validation() {
  Outcome o;
  double worst = 0.0;
  std::string worst_where;
  for (auto s : {Scenario::cx, Scenario::xm_conf, Scenario::my_conf}) {
    const auto config = ScenarioConfig::defaults(s);
    const auto analytic = compute_truths(config);
    const auto brute = testing::brute_force_truths(config, 1'000'000, 20240601 + static_cast<std::uint64_t>(s));
    for (auto m : {Method::dic, Method::kob, Method::cda}) {
      const auto& a = analytic.of(m);
      const auto& b = brute.of(m);
      for (auto [name, x, y] : {std::tuple{"initial", a.initial, b.initial},
                                std::tuple{"explained", a.explained, b.explained},
                                std::tuple{"unexplained", a.unexplained, b.unexplained}}) {
        const double err = std::abs(x - y);
        if (err > worst) {
          worst = err;
          worst_where = std::string(to_string(s)) + " " + std::string(to_string(m)) + " " + name;
        }
      }
    }
  }
  o.require(worst <= 0.005, "tolerance");
  o.detail << " largest |analytic - brute force| = " << fmt(worst) << " (" << worst_where << ")";
  return o;
}

std::vector<double> replicate_values(const SimulationReport& r, Method m, double DecompositionResult::*field) {
  std::vector<double> v;
  for (const auto& rep : r.replicates) {
    const auto& est = m == Method::dic ? rep.dic : m == Method::kob ? rep.kob : rep.cda;
    v.push_back((*est).*field);
  }
  return v;
}

Outcome regime_one(Suite& suite) {
  Outcome o;
  const auto& r = suite.get(Scenario::none);
  const auto dic = replicate_values(r, Method::dic, &DecompositionResult::explained);
  const auto kob = replicate_values(r, Method::kob, &DecompositionResult::explained);
  std::vector<double> diff(dic.size());
  for (std::size_t i = 0; i < dic.size(); ++i) diff[i] = dic[i] - kob[i];
  const double gap = std::abs(mean_of(diff));
  const double se = mc_se(diff);
  o.require(gap < 3.0 * se, "DIC vs KOB explained");
  for (const auto* label : {"DIC", "KOB", "CDA"}) {
    const auto& m = r.method(label);
    o.require(m.initial.covered && m.explained.covered && m.unexplained.covered, std::string(label) + " coverage");
  }
  o.require(suite.seconds[Scenario::none] < 30.0, "runtime");
  o.detail << " |mean DIC - KOB explained| = " << fmt(gap) << " vs 3 MC-SE = " << fmt(3 * se)
           << ", all methods cover, " << fmt(suite.seconds[Scenario::none]) << " s";
  return o;
}

Outcome scenario_one(Suite& suite) {
  Outcome o;
  const auto& r = suite.get(Scenario::xm_conf);
  const double baseline = compute_truths(ScenarioConfig::defaults(Scenario::cx)).dic.explained;
  const auto& dic = r.method("DIC").explained;
  o.require(baseline < dic.lower || baseline > dic.upper, "DIC explained excludes cx baseline");
  o.require(dic.mean < baseline, "inflation direction");
  for (const auto* label : {"KOB", "CDA"}) {
    const auto& m = r.method(label);
    o.require(m.initial.covered && m.explained.covered && m.unexplained.covered, std::string(label) + " coverage");
  }
  o.detail << " DIC explained " << fmt(dic.mean) << " [" << fmt(dic.lower) << ", " << fmt(dic.upper)
           << "] vs cx baseline " << fmt(baseline) << "; KOB explained " << fmt(r.method("KOB").explained.mean)
           << " (truth " << fmt(r.method("KOB").explained.truth) << "), CDA explained "
           << fmt(r.method("CDA").explained.mean) << " (truth " << fmt(r.method("CDA").explained.truth) << ")";
  return o;
}

Outcome scenario_two(Suite& suite) {
  Outcome o;
  const auto& r = suite.get(Scenario::my_conf);
  for (const auto* label : {"KOB", "CDA"}) {
    const auto& m = r.method(label);
    o.require(m.initial.covered, std::string(label) + " initial covers");
    o.require(!m.explained.covered && !m.unexplained.covered, std::string(label) + " explained/unexplained miss");
  }
  const auto& adj = r.method("Adj. CDA");
  o.require(adj.initial.covered && adj.explained.covered && adj.unexplained.covered, "Adj. CDA coverage");

  // bias(delta) + bias(zeta) = mean(tau hat) - tau
  const auto tau = replicate_values(r, Method::cda, &DecompositionResult::initial);
  const auto& cda = r.method("CDA");
  const double offset = (cda.explained.mean - cda.explained.truth) + (cda.unexplained.mean - cda.unexplained.truth);
  const double se = mc_se(tau);
  o.require(std::abs(offset) < 3.0 * se, "offsetting biases");
  o.detail << " CDA explained " << fmt(cda.explained.mean) << " vs " << fmt(cda.explained.truth)
           << ", Adj. CDA explained " << fmt(adj.explained.mean) << " [" << fmt(adj.explained.lower) << ", "
           << fmt(adj.explained.upper) << "], bias sum " << fmt(offset) << " vs 3 MC-SE " << fmt(3 * se);
  return o;
}

Outcome pathway_identities() {
  Outcome o;
  const auto c_only = ScenarioConfig::defaults(Scenario::c_only);
  const auto tc = compute_truths(c_only);
  const double c_err = std::abs(tc.kob.initial - tc.cda.initial - c_pathway_contribution(c_only));
  const auto x_only = ScenarioConfig::defaults(Scenario::x_only);
  const auto tx = compute_truths(x_only);
  // DIC conditions on X, so its initial disparity lacks the X pathway.
  const double x_err = std::abs(tx.cda.initial - tx.dic.initial - x_pathway_contribution(x_only));
  o.require(c_err <= 1e-9, "C pathway");
  o.require(x_err <= 1e-9, "X pathway");
  o.detail << " C pathway " << fmt(c_pathway_contribution(c_only)) << " (err " << fmt(c_err) << "), X pathway "
           << fmt(x_pathway_contribution(x_only)) << " (err " << fmt(x_err) << ")";
  return o;
}

std::string fingerprint(const SimulationReport& r) {
  std::ostringstream out;
  out << render(simulation_table(r), Format::csv).body;
  char buf[64];
  for (const auto& rep : r.replicates) {
    for (const auto* est : {&rep.dic, &rep.kob, &rep.cda}) {
      std::snprintf(buf, sizeof buf, "%a %a ", (*est)->initial, (*est)->explained);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%a\n", rep.adjusted->delta_adjusted);
    out << buf;
  }
  return out.str();
}

Outcome determinism() {
  Outcome o;
  auto config = ScenarioConfig::defaults(Scenario::both);
  config.seed = 31337;
  HarnessOptions options;
  options.oracle_sensitivity = true;
  const auto serial = fingerprint(run_harness(config, options));
  options.workers = 4;
  const auto threaded = fingerprint(run_harness(config, options));
  options.workers = 1;
  const auto repeat = fingerprint(run_harness(config, options));
  o.require(serial == threaded, "workers 1 vs 4");
  o.require(serial == repeat, "repeat run");
  o.detail << " both scenario, 200 reps: " << serial.size() << " bytes identical across workers 1/4 and reruns";
  return o;
}

Outcome full_suite(Suite& suite) {
  Outcome o;
  double total = 0.0;
  for (auto s : all_scenarios()) {
    suite.get(s);
    total += suite.seconds[s];
  }
  o.require(total < 120.0, "runtime");
  o.detail << " 7 scenarios x 200 reps x n = 2000, single-threaded: " << fmt(total) << " s";
  return o;
}

}  // namespace

int main() {
  Suite suite;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact identities", exact_identities},
      {"worked examples", worked_examples},
      {"truth oracle vs brute-force simulation", oracle_cross_validation},
      {"regime one equivalence", [&] { return regime_one(suite); }},
      {"X-M confounding", [&] { return scenario_one(suite); }},
      {"M-Y confounding and sensitivity adjustment", [&] { return scenario_two(suite); }},
      {"initial-disparity pathways", pathway_identities},
      {"determinism across workers and runs", determinism},
      {"full default suite runtime", [&] { return full_suite(suite); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << " " << criteria[i].first << ":" << o.detail.str()
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
