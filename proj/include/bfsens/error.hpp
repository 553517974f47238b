#pragma once

#include <stdexcept>
#include <string>

namespace bfsens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied data or configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A density was evaluated outside the parameter domain of its family
// (e.g. a scale hyper-parameter at or below zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double best_estimate, double error_bound)
      : Error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The anchor does not sit in a well-supported region of the density estimate.
class AnchorPlacementError : public Error {
 public:
  using Error::Error;
};

// Product-space indicator never left one state in some chain.
class MixingError : public Error {
 public:
  using Error::Error;
};

}  // namespace bfsens
