#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qe {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments of an operation was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or invariant-violating dataset input.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// A prompt template or template catalog failed validation.
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration (unknown ids, missing paths, bad values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The judge backend could not be reached.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The judge backend answered with a non-success HTTP status.
class BackendError : public Error {
 public:
  BackendError(int status, std::string body_excerpt)
      : Error("backend returned HTTP " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

/// No cached (or scripted) completion exists for a request.
class CacheMissError : public Error {
 public:
  using Error::Error;
};

/// A judge response could not be parsed and the fallback policy forbids a default.
class UnparseableResponse : public Error {
 public:
  explicit UnparseableResponse(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Rank correlation is undefined (a score vector has zero variance).
class CorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qe
