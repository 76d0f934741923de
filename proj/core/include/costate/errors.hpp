#pragma once

#include <stdexcept>
#include <string>

namespace costate {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, runtime 4.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent configuration (bad field values, unknown keys).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed or unusable input data (parse failures, empty cohorts, ...).
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Shape incompatibility in a numeric operation.
struct DimensionError : Error {
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures (unwritable paths, missing files).
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace costate
