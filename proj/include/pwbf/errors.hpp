#pragma once

#include <stdexcept>
#include <string>

namespace pwbf {

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, truncated or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  enum class Kind { kGeneric, kNotADataset, kVersionMismatch, kTruncated, kSizeMismatch };

  explicit DataError(const std::string& what, Kind kind = Kind::kGeneric)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A computation that cannot produce a finite answer (CLI exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pwbf
