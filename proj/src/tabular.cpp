#include "disparity/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "disparity/errors.hpp"

namespace disparity {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

}  // namespace

void RoleSpec::validate() const {
  std::set<std::string> seen;
  auto claim = [&](const std::string& name, std::string_view role) {
    if (name.empty()) throw DataError("empty column name for role " + std::string(role));
    if (!seen.insert(name).second) {
      throw DataError("column " + name + " is assigned to more than one role");
    }
  };
  claim(group, "group");
  claim(outcome, "outcome");
  claim(mediator, "mediator");
  for (const auto& c : baseline) claim(c, "baseline");
  for (const auto& x : intermediate) claim(x, "intermediate");
}

std::vector<std::string> RoleSpec::covariates() const {
  std::vector<std::string> out = baseline;
  out.insert(out.end(), intermediate.begin(), intermediate.end());
  return out;
}

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                 RoleSpec roles)
    : names_(std::move(names)), columns_(std::move(columns)), roles_(std::move(roles)) {
  if (names_.size() != columns_.size()) {
    throw DataError("column name count does not match column count");
  }
  roles_.validate();
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (std::find(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(j), names_[j]) !=
        names_.begin() + static_cast<std::ptrdiff_t>(j)) {
      throw DataError("duplicate column name " + names_[j]);
    }
  }
  n_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != n_) throw DataError("column " + names_[j] + " has a different length");
  }
  std::vector<std::string> required{roles_.group, roles_.outcome, roles_.mediator};
  for (const auto& c : roles_.covariates()) required.push_back(c);
  for (const auto& name : required) {
    if (!has_column(name)) throw DataError("column " + name + " not found");
  }
  const auto& g = group();
  for (std::size_t i = 0; i < n_; ++i) {
    if (g[i] == 1.0) {
      ++n1_;
    } else if (g[i] != 0.0) {
      std::ostringstream msg;
      msg << "group column " << roles_.group << " has value " << g[i] << " at row " << i + 1
          << "; only 0 and 1 are allowed";
      throw DataError(msg.str());
    }
  }
  if (n1_ == 0 || n1_ == n_) {
    throw DataError("group " + std::string(n1_ == 0 ? "1" : "0") + " has no units");
  }
}

bool Dataset::has_column(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dataset::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("column " + std::string(name) + " not found");
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& Dataset::column(std::string_view name) const {
  return columns_[index_of(name)];
}

std::vector<std::size_t> Dataset::group_indices(int r) const {
  const auto& g = group();
  const double target = r == 1 ? 1.0 : 0.0;
  std::vector<std::size_t> out;
  out.reserve(group_size(r));
  for (std::size_t i = 0; i < n_; ++i) {
    if (g[i] == target) out.push_back(i);
  }
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (auto i : rows) cols[j].push_back(columns_[j].at(i));
  }
  return Dataset(names_, std::move(cols), roles_);
}

double GroupMeans::of(std::string_view name, int r) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("column " + std::string(name) + " not found");
  const auto j = static_cast<std::size_t>(it - names.begin());
  return r == 1 ? group1[j] : group0[j];
}

GroupMeans group_means(const Dataset& data) {
  GroupMeans out;
  out.names = data.column_names();
  const auto& g = data.group();
  const auto n1 = static_cast<double>(data.group_size(1));
  const auto n0 = static_cast<double>(data.group_size(0));
  for (const auto& name : out.names) {
    const auto& col = data.column(name);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) (g[i] == 1.0 ? s1 : s0) += col[i];
    out.group0.push_back(s0 / n0);
    out.group1.push_back(s1 / n1);
  }
  return out;
}

Dataset parse_csv(std::istream& in, const RoleSpec& roles, std::string_view source) {
  roles.validate();
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(source) + ": missing header row");
  std::vector<std::string> names;
  for (auto cell : split_commas(line)) names.emplace_back(cell);

  std::vector<std::vector<double>> columns(names.size());
  // row counts data rows (header excluded); line counts physical lines
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != names.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << " (line " << line_no << ") has " << cells.size() << " cells, expected "
          << names.size();
      throw DataError(msg.str());
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto cell = cells[j];
      if (cell.empty()) {
        std::ostringstream msg;
        msg << source << ": empty cell at row " << row << " (line " << line_no << "), column " << names[j];
        throw DataError(msg.str());
      }
      double value = 0.0;
      const auto* begin = cell.data();
      const auto* end = cell.data() + cell.size();
      // from_chars rejects a leading '+'
      if (*begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr != end) {
        std::ostringstream msg;
        msg << source << ": cannot parse \"" << cell << "\" as a number at row " << row
            << " (line " << line_no << "), column " << names[j];
        throw DataError(msg.str());
      }
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << source << ": non-finite value \"" << cell << "\" at row " << row << " (line " << line_no
            << "), column " << names[j];
        throw DataError(msg.str());
      }
      columns[j].push_back(value);
    }
  }
  return Dataset(std::move(names), std::move(columns), roles);
}

Dataset load_csv(const std::filesystem::path& path, const RoleSpec& roles) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, roles, path.string());
}

void write_csv(const Dataset& data, std::ostream& out) {
  const auto& names = data.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  std::vector<const std::vector<double>*> cols;
  for (const auto& name : names) cols.push_back(&data.column(name));
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, (*cols[j])[i]);
      if (j) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace disparity
