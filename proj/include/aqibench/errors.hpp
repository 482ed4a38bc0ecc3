#pragma once

#include <stdexcept>
#include <string>

namespace aqibench {

/// Malformed input data (CSV layout, unparseable fields, bad file contents).
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A domain invariant or precondition was violated.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Training aborted (non-finite loss, impossible configuration).
class TrainingError : public std::runtime_error {
  public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aqibench
