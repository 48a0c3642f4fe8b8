// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gpdphs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant (symmetry, skewness, positivity) does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization of a Gram matrix failed.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Time integration could not continue (CFL violation, dry channel, blow-up).
class SimulationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpdphs
