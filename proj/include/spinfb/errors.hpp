#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinfb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// A matrix that was required to be a density matrix is not one.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class OutOfBallError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Formula evaluated at a point where it divides by zero (e.g. a pure state).
class SingularInputError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class EnsembleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Integration left the state space by more than round-off.
class DivergedError : public Error {
 public:
  explicit DivergedError(const std::string& what, std::size_t step = 0,
                         double t = 0.0, double control = 0.0,
                         double purity = 0.0)
      : Error(what), step_(step), t_(t), control_(control), purity_(purity) {}

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return t_; }
  double control() const noexcept { return control_; }
  double purity() const noexcept { return purity_; }

 private:
  std::size_t step_;
  double t_;
  double control_;
  double purity_;
};

/// Carries every violation found while validating a configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace spinfb
