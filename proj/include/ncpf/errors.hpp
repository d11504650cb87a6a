#pragma once

#include <stdexcept>
#include <string>

namespace ncpf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition or dimension contract was broken by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

/// A numeric kernel failed (non-convergence, loss of definiteness, ...).
struct NumericFailure : Error {
  using Error::Error;
};

/// All particle weights collapsed to zero likelihood.
struct DegeneracyError : Error {
  using Error::Error;
};

/// The candidate sweep produced no usable support element.
struct DetectionFailure : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace ncpf
