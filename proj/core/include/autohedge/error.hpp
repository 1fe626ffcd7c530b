#pragma once

#include <stdexcept>
#include <string>

namespace autohedge {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A function argument outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed numeric input (non-finite draws, mismatched lengths, degenerate
// markets).
class DataError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current state (e.g. stepping a finished episode).
class StateError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses or gradients during optimisation.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// File system and serialisation failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace autohedge
