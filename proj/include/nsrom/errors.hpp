#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsrom {

// Base of every error the library throws. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition (wrong sizes, asymmetric input, r > rank, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: singular pivot, Newton divergence, eigensolver stall.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Malformed input text or binary archive.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Bad experiment configuration or missing input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

// Newton failure inside a time loop; carries where it happened.
class StepError : public SolverError {
 public:
  StepError(const std::string& what, std::size_t step, double residual)
      : SolverError(what + " (step " + std::to_string(step) + ", residual " +
                    std::to_string(residual) + ")"),
        step_(step),
        residual_(residual) {}

  std::size_t step() const noexcept { return step_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t step_;
  double residual_;
};

#define NSROM_REQUIRE(cond, msg)                               \
  do {                                                         \
    if (!(cond)) throw ::nsrom::PreconditionError(msg);        \
  } while (false)

}  // namespace nsrom
