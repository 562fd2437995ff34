#include "disparity/render.hpp"

#include <charconv>
#include <sstream>

#include "disparity/errors.hpp"

namespace disparity {

namespace {

std::string sign_text(int sign) { return sign < 0 ? "-" : "+"; }

}  // namespace

Format parse_format(std::string_view text) {
  if (text == "markdown" || text == "md") return Format::markdown;
  if (text == "csv") return Format::csv;
  throw ConfigError("unknown format " + std::string(text));
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
  return std::string(buf, ptr);
}

RenderedReport render(const ReportTable& table, Format format) {
  std::ostringstream out;
  if (format == Format::markdown) {
    for (std::size_t b = 0; b < table.blocks.size(); ++b) {
      const auto& block = table.blocks[b];
      if (b) out << '\n';
      out << "### " << block.title << "\n\n|";
      for (const auto& h : table.headers) out << ' ' << h << " |";
      out << "\n|";
      for (std::size_t j = 0; j < table.headers.size(); ++j) out << "---|";
      out << '\n';
      for (const auto& row : block.rows) {
        out << '|';
        for (std::size_t j = 0; j < table.headers.size(); ++j) {
          const std::string& v = j < row.size() ? row[j] : std::string{};
          out << ' ' << (v.empty() ? "—" : v) << " |";
        }
        out << '\n';
      }
    }
    for (const auto& note : table.notes) out << "\n> " << note << '\n';
  } else {
    out << "method";
    for (const auto& h : table.headers) out << ',' << h;
    out << '\n';
    for (const auto& block : table.blocks) {
      for (const auto& row : block.rows) {
        out << block.title;
        for (std::size_t j = 0; j < table.headers.size(); ++j) {
          out << ',' << (j < row.size() ? row[j] : std::string{});
        }
        out << '\n';
      }
    }
  }
  return {format, out.str()};
}

ReportTable decomposition_table(std::span<const DecompositionResult> results) {
  ReportTable t;
  t.headers = {"quantity", "estimate", "2.5%", "97.5%"};
  for (const auto& r : results) {
    auto row = [](std::string name, double v, const std::optional<Interval>& ci) {
      return std::vector<std::string>{std::move(name), format_number(v),
                                      ci ? format_number(ci->lower) : "",
                                      ci ? format_number(ci->upper) : ""};
    };
    ReportTable::Block block{std::string(to_string(r.method)), {}};
    block.rows.push_back(row("initial", r.initial, r.initial_ci));
    block.rows.push_back(row("explained", r.explained, r.explained_ci));
    block.rows.push_back(row("unexplained", r.unexplained, r.unexplained_ci));
    block.rows.push_back({"proportion_pct",
                          r.proportion_explained_pct ? format_number(*r.proportion_explained_pct)
                                                     : "undefined",
                          "", ""});
    t.blocks.push_back(std::move(block));
  }
  return t;
}

ReportTable simulation_table(const SimulationReport& report) {
  ReportTable t;
  t.headers = {"quantity", "estimate", "2.5%", "97.5%", "truth", "covered"};
  for (const auto& m : report.methods) {
    ReportTable::Block block{m.label, {}};
    auto row = [](std::string name, const QuantitySummary& q) {
      return std::vector<std::string>{std::move(name),      format_number(q.mean),
                                      format_number(q.lower), format_number(q.upper),
                                      format_number(q.truth), q.covered ? "yes" : "no"};
    };
    block.rows.push_back(row("initial", m.initial));
    block.rows.push_back(row("explained", m.explained));
    block.rows.push_back(row("unexplained", m.unexplained));
    t.blocks.push_back(std::move(block));
  }
  std::ostringstream note;
  note << "scenario " << to_string(report.config.scenario) << ", " << report.config.reps
       << " replications of n = " << report.config.n << ", seed " << report.config.seed;
  t.notes.push_back(note.str());
  if (report.interval_unreliable) t.notes.emplace_back("interval unreliable: fewer than 20 replications");
  return t;
}

ReportTable sensitivity_table(std::span<const AdjustedResult> cells) {
  ReportTable t;
  t.headers = {"r2_yu", "r2_mu", "sign", "bias", "tau", "delta_adjusted", "zeta_adjusted"};
  ReportTable::Block block{"CDA sensitivity", {}};
  for (const auto& c : cells) {
    block.rows.push_back({format_number(c.r2_yu), format_number(c.r2_mu), sign_text(c.sign),
                          format_number(c.bias), format_number(c.tau), format_number(c.delta_adjusted),
                          format_number(c.zeta_adjusted)});
  }
  t.blocks.push_back(std::move(block));
  return t;
}

ReportTable benchmark_table(std::span<const BenchmarkRecord> records) {
  ReportTable t;
  t.headers = {"covariate", "r2_with_y", "r2_with_m"};
  ReportTable::Block block{"benchmark", {}};
  for (const auto& r : records) {
    block.rows.push_back({r.name, format_number(r.r2_with_y), format_number(r.r2_with_m)});
  }
  t.blocks.push_back(std::move(block));
  return t;
}

}  // namespace disparity
