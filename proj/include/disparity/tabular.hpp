#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disparity {

/// Maps analysis roles onto column names.
///
/// group is coded 0/1 with 1 = the disadvantaged (target) group. baseline
/// holds pre-group covariates (C); intermediate holds confounders that are
/// themselves affected by group membership (X).
struct RoleSpec {
  std::string group;
  std::string outcome;
  std::string mediator;
  std::vector<std::string> baseline;
  std::vector<std::string> intermediate;

  /// Throws DataError if any name is empty or used by two roles.
  void validate() const;

  /// baseline then intermediate, in declaration order.
  std::vector<std::string> covariates() const;
};

/// Immutable rectangular table of real-valued columns with role tags.
class Dataset {
 public:
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns, RoleSpec roles);

  std::size_t size() const noexcept { return n_; }
  const RoleSpec& roles() const noexcept { return roles_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  bool has_column(std::string_view name) const noexcept;
  const std::vector<double>& column(std::string_view name) const;

  const std::vector<double>& group() const { return column(roles_.group); }
  const std::vector<double>& outcome() const { return column(roles_.outcome); }
  const std::vector<double>& mediator() const { return column(roles_.mediator); }

  std::size_t group_size(int r) const noexcept { return r == 1 ? n1_ : n_ - n1_; }
  std::vector<std::size_t> group_indices(int r) const;

  /// New dataset made of the given rows (repeats allowed), same roles.
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  RoleSpec roles_;
  std::size_t n_ = 0;
  std::size_t n1_ = 0;
};

/// Per-group arithmetic means of every column, in column order.
struct GroupMeans {
  std::vector<std::string> names;
  std::vector<double> group0;
  std::vector<double> group1;

  double of(std::string_view name, int r) const;
};

GroupMeans group_means(const Dataset& data);

Dataset parse_csv(std::istream& in, const RoleSpec& roles, std::string_view source = "<stream>");
Dataset load_csv(const std::filesystem::path& path, const RoleSpec& roles);

/// Shortest round-trip representation; reloading gives bit-identical values.
void write_csv(const Dataset& data, std::ostream& out);

}  // namespace disparity
