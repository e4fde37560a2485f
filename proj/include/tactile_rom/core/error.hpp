#pragma once

#include <stdexcept>
#include <string>

namespace trom {

// Error taxonomy maps onto CLI exit codes: config 2, numerical 3, io 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutOfDomainError : NumericalError {
  explicit OutOfDomainError(const std::string& msg) : NumericalError(msg) {}
};

struct InversionError : NumericalError {
  explicit InversionError(const std::string& msg) : NumericalError(msg) {}
};

struct ShapeError : NumericalError {
  explicit ShapeError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace trom
