#pragma once

#include <stdexcept>
#include <string>

namespace outreach {

// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kDataError = 3,
  kStageFailure = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kStageFailure; }
};

// Bad or missing configuration: unknown keys, unreadable paths, invalid values.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
};

// Input data violates a contract (duplicate ids, malformed files, single-class
// training data, ...).
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kDataError; }
};

// Wraps a failure with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error("stage '" + stage + "': " + cause.what()),
        stage_(std::move(stage)),
        code_(cause.exit_code()) {}
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "': " + message),
        stage_(std::move(stage)),
        code_(ExitCode::kStageFailure) {}

  const std::string& stage() const noexcept { return stage_; }
  ExitCode exit_code() const noexcept override { return code_; }

 private:
  std::string stage_;
  ExitCode code_;
};

}  // namespace outreach
