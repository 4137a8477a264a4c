#pragma once

#include <stdexcept>
#include <string>

namespace communitypoll {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration (config file, environment, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition or invariant.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Remote data source unreachable and no cached copy available.
class FetchError : public Error {
 public:
  using Error::Error;
};

// Payload present but failed structural validation.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Template rendering failed; message names the offending placeholder.
class RenderError : public Error {
 public:
  using Error::Error;
};

// Response text could not be parsed into the expected structure.
class ParseError : public Error {
 public:
  using Error::Error;
};

// LLM provider failed after retries.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// Pipeline command invoked before its prerequisite stage completed.
class StageOrderError : public Error {
 public:
  using Error::Error;
};

}  // namespace communitypoll
