#include "disparity/cli.hpp"

#include <charconv>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "disparity/decompose.hpp"
#include "disparity/errors.hpp"
#include "disparity/render.hpp"
#include "disparity/sensitivity.hpp"
#include "disparity/simulate.hpp"

namespace disparity {

namespace {

struct DataFlags {
  std::string path;
  std::string group;
  std::string outcome;
  std::string mediator;
  std::vector<std::string> baseline;
  std::vector<std::string> intermediate;

  void attach(CLI::App& app) {
    app.add_option("--data", path, "CSV file with a header row")->required();
    app.add_option("--group", group, "0/1 group column (1 = target group)")->required();
    app.add_option("--outcome", outcome, "outcome column")->required();
    app.add_option("--mediator", mediator, "mediator column")->required();
    app.add_option("--baseline", baseline, "baseline covariates, comma separated")->delimiter(',');
    app.add_option("--intermediate", intermediate, "intermediate confounders, comma separated")
        ->delimiter(',');
  }

  Dataset load() const { return load_csv(path, RoleSpec{group, outcome, mediator, baseline, intermediate}); }
};

std::uint64_t parse_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("invalid --seed " + text + " (expected an unsigned integer or \"random\")");
  }
  return value;
}

int parse_sign(const std::string& text) {
  if (text == "+" || text == "+1" || text == "1") return +1;
  if (text == "-" || text == "-1") return -1;
  throw ConfigError("invalid --sign " + text + " (expected + or -)");
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto token = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
      throw ConfigError("invalid value \"" + std::string(token) + "\" in " + std::string(what));
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

void print(std::ostream& out, const ReportTable& table, const std::string& format) {
  out << render(table, parse_format(format)).body;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disparity decomposition: DIC, KOB and causal decomposition with sensitivity analysis"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string format = "markdown";
  std::string seed_text = "0";
  int mc_draws = 100;
  unsigned workers = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "markdown or csv")
        ->check(CLI::IsMember({"markdown", "csv"}))
        ->capture_default_str();
    sub->add_option("--seed", seed_text, "unsigned integer or \"random\"")->capture_default_str();
    sub->add_option("--mc-draws", mc_draws, "mediator draws per unit for CDA")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  // decompose
  auto* dec = app.add_subcommand("decompose", "decompose a disparity in a CSV data set");
  DataFlags dec_data;
  dec_data.attach(*dec);
  std::string method = "all";
  int bootstrap_b = 0;
  dec->add_option("--method", method, "dic, kob, cda or all")
      ->check(CLI::IsMember({"dic", "kob", "cda", "all"}))
      ->capture_default_str();
  dec->add_option("--bootstrap", bootstrap_b, "bootstrap replicates (0 = none)")
      ->check(CLI::NonNegativeNumber);
  dec->add_option("--workers", workers, "bootstrap worker threads")->check(CLI::PositiveNumber);
  add_common(dec);

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "adjust CDA for unmeasured mediator-outcome confounding");
  DataFlags sens_data;
  sens_data.attach(*sens);
  double r2_yu = 0.0, r2_mu = 0.0;
  std::string sign_text = "+";
  std::string grid_text;
  auto* yu_opt = sens->add_option("--r2-yu", r2_yu, "partial R2 of U with the outcome");
  auto* mu_opt = sens->add_option("--r2-mu", r2_mu, "partial R2 of U with the mediator");
  auto* grid_opt = sens->add_option("--grid", grid_text, "\"yu1,yu2,...;mu1,mu2,...\"");
  grid_opt->excludes(yu_opt)->excludes(mu_opt);
  yu_opt->needs(mu_opt);
  mu_opt->needs(yu_opt);
  sens->add_option("--sign", sign_text, "+ if U pushes M and Y the same way, else -")
      ->capture_default_str();
  add_common(sens);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "partial R2 of observed covariates");
  DataFlags bench_data;
  bench_data.attach(*bench);
  bench->add_option("--format", format, "markdown or csv")
      ->check(CLI::IsMember({"markdown", "csv"}))
      ->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "replicate a simulation scenario");
  std::string scenario_tag;
  std::string config_path;
  std::size_t reps = 0, n = 0;
  bool oracle_sensitivity = false;
  sim->add_option("--scenario", scenario_tag, "none, c-only, x-only, cx, xm-conf, my-conf, both");
  sim->add_option("--config", config_path, "JSON scenario config")->check(CLI::ExistingFile);
  sim->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
  sim->add_option("--n", n, "units per replication")->check(CLI::Range(std::size_t{50}, std::size_t{100000000}));
  sim->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--oracle-sensitivity", oracle_sensitivity,
                "add sensitivity-adjusted CDA using the true U parameters");
  add_common(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (dec->parsed()) {
      const auto data = dec_data.load();
      CdaSettings settings;
      settings.mc_draws_per_unit = mc_draws;
      settings.seed = parse_seed(seed_text);
      std::vector<Method> methods;
      if (method == "all") {
        methods = {Method::dic, Method::kob, Method::cda};
      } else {
        methods = {parse_method(method)};
      }
      // With several methods, one failing estimator does not hide the others.
      std::vector<DecompositionResult> results;
      int status = 0;
      for (auto m : methods) {
        try {
          results.push_back(bootstrap_b > 0
                                ? bootstrap(data, m, settings, bootstrap_b, settings.seed, workers)
                                : decompose(data, m, settings));
        } catch (const EstimationError& e) {
          if (methods.size() == 1) throw;
          err << "error: " << to_string(m) << ": " << e.what() << '\n';
          status = 2;
        }
      }
      if (!results.empty()) print(out, decomposition_table(results), format);
      return status;
    } else if (sens->parsed()) {
      if (grid_text.empty() && yu_opt->count() == 0) {
        err << "sensitivity: give --r2-yu and --r2-mu, or --grid\n";
        return 1;
      }
      const int sign = parse_sign(sign_text);
      std::vector<double> yu_values{r2_yu}, mu_values{r2_mu};
      if (!grid_text.empty()) {
        const auto split = grid_text.find(';');
        if (split == std::string::npos) throw ConfigError("--grid needs two lists separated by ';'");
        yu_values = parse_list(std::string_view(grid_text).substr(0, split), "--grid");
        mu_values = parse_list(std::string_view(grid_text).substr(split + 1), "--grid");
      }
      for (double v : yu_values) SensitivityParams{v, 0.0, sign}.validate();
      for (double v : mu_values) SensitivityParams{0.0, v, sign}.validate();

      const auto data = sens_data.load();
      CdaSettings settings;
      settings.mc_draws_per_unit = mc_draws;
      settings.seed = parse_seed(seed_text);
      const auto cda = decompose_cda(data, settings);
      const auto cells = grid(cda, data, yu_values, mu_values, sign);
      print(out, sensitivity_table(cells), format);
    } else if (bench->parsed()) {
      const auto records = benchmark(bench_data.load());
      print(out, benchmark_table(records), format);
    } else if (sim->parsed()) {
      std::optional<Scenario> scenario;
      if (!scenario_tag.empty()) scenario = parse_scenario(scenario_tag);
      ScenarioConfig config;
      if (!config_path.empty()) {
        config = load_config(config_path, scenario);
      } else if (scenario) {
        config = ScenarioConfig::defaults(*scenario);
      } else {
        err << "simulate: --scenario or --config is required\n";
        return 1;
      }
      if (reps) config.reps = reps;
      if (n) config.n = n;
      if (sim->count("--seed")) config.seed = parse_seed(seed_text);
      config.validate();

      HarnessOptions options;
      options.mc_draws_per_unit = mc_draws;
      options.workers = workers;
      options.oracle_sensitivity = oracle_sensitivity;
      const auto report = run_harness(config, options);
      print(out, simulation_table(report), format);
      if (report.interval_unreliable && format == "csv") {
        err << "note: interval unreliable: fewer than 20 replications\n";
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace disparity
