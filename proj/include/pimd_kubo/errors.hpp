#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pimd_kubo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or inputs at an API boundary.
class ValidationError : public Error {
public:
  using Error::Error;
};

class InsufficientSamples : public Error {
public:
  using Error::Error;
};

class UnsupportedObservable : public Error {
public:
  using Error::Error;
};

// A CMD trajectory left the tabulated centroid-force range.
class GridEscape : public Error {
public:
  using Error::Error;
};

class GridTooCoarse : public Error {
public:
  using Error::Error;
};

// A retained eigenstate does not vanish at the grid boundary.
class BoundaryLeak : public Error {
public:
  using Error::Error;
};

// The retained spectrum does not cover the Boltzmann weight at this beta.
class SpectralIncomplete : public Error {
public:
  using Error::Error;
};

class QuadratureFailure : public Error {
public:
  using Error::Error;
};

// Non-fatal diagnostics (e.g. a non-ergodic acceptance rate) travel with results.
struct Warning {
  std::string code;
  std::string message;
};

using Warnings = std::vector<Warning>;

}  // namespace pimd_kubo
