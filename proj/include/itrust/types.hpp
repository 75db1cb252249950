#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace itrust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Input dimensions or values violate an operation's contract.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The ECIM energy became non-finite or exceeded the divergence tripwire.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A numerical routine failed to converge or produced non-finite output.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The request is outside what an oracle can handle (e.g. grid search in
/// too many dimensions).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few usable points for a regression.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + ": dimension " + std::to_string(got) +
                        " does not match " + std::to_string(want));
  }
}

}  // namespace itrust
