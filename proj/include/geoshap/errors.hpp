#pragma once

#include <stdexcept>
#include <string>

namespace geoshap {

// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
  kConfig = 2,
  kData = 3,
  kPredictor = 4,
  kNumerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::kConfig, message) {}
};

// Exhaustive enumeration limits (player counts, oracle sizes).
class CapacityError : public ConfigError {
 public:
  explicit CapacityError(const std::string& message) : ConfigError(message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorCategory::kData, message) {}
};

class PredictorError : public Error {
 public:
  explicit PredictorError(const std::string& message)
      : Error(ErrorCategory::kPredictor, message) {}
};

// Malformed bridge traffic: bad JSON, unknown frame types, id mismatches.
class ProtocolError : public PredictorError {
 public:
  explicit ProtocolError(const std::string& message)
      : PredictorError(message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorCategory::kNumerical, message) {}
};

}  // namespace geoshap
