#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace disparity {

/// Malformed input data: unreadable files, bad cells, invalid group coding.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model could not be estimated on the data it was given.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Design matrix is rank deficient; carries one minimal dependent column set.
class RankDeficientError : public EstimationError {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : EstimationError(what), columns_(std::move(columns)) {}

  const std::vector<std::string>& dependent_columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

/// Invalid scenario / coefficient / option settings.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace disparity
