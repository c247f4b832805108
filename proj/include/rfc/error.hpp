#pragma once

#include <stdexcept>
#include <string>

namespace rfc {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input document (model file, clip file, config file).
struct ParseError : Error {
  using Error::Error;
};

// Well-formed input that violates a model/clip invariant (cycles,
// nonpositive mass, wrong frame dimension, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Caller broke an API precondition (dimension mismatch, bad index).
struct ContractError : Error {
  using Error::Error;
};

// Inconsistent run configuration (incompatible checkpoint, bad mode).
struct ConfigError : Error {
  using Error::Error;
};

// Numerical failure at runtime (diverged integration, singular solve).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace rfc
