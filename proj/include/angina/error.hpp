#pragma once

#include <stdexcept>
#include <string>

namespace angina {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, records, ids).
class DataError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; `stage()` names it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace angina
