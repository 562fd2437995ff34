#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disparity/decompose.hpp"
#include "disparity/sensitivity.hpp"
#include "disparity/simulate.hpp"

namespace disparity {

enum class Format { markdown, csv };

Format parse_format(std::string_view text);

/// Rows grouped into titled blocks sharing one header. Empty cells mean "no value".
struct ReportTable {
  std::vector<std::string> headers;
  struct Block {
    std::string title;
    std::vector<std::vector<std::string>> rows;
  };
  std::vector<Block> blocks;
  /// Printed under the tables in markdown only.
  std::vector<std::string> notes;
};

struct RenderedReport {
  Format format = Format::markdown;
  std::string body;
};

/// 6 significant digits, shortest form, always '.' as decimal point.
std::string format_number(double value);

/// Markdown: one table per block, empty cells as an em dash. CSV: a leading
/// "method" column carrying the block title, empty cells left empty.
RenderedReport render(const ReportTable& table, Format format);

ReportTable decomposition_table(std::span<const DecompositionResult> results);
ReportTable simulation_table(const SimulationReport& report);
ReportTable sensitivity_table(std::span<const AdjustedResult> cells);
ReportTable benchmark_table(std::span<const BenchmarkRecord> records);

}  // namespace disparity
