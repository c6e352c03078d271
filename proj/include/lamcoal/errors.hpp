#pragma once

#include <stdexcept>
#include <string>

namespace lamcoal {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain (bad parameter, bad time, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds a configured capacity (N_max, expected jump count, ...).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An experiment would violate its finite-n validity guard.
class GuardError : public Error {
 public:
  GuardError(const std::string& what, double minimal_n0)
      : Error(what), minimal_n0_(minimal_n0) {}
  double minimal_n0() const noexcept { return minimal_n0_; }

 private:
  double minimal_n0_;
};

/// A numerical routine failed to reach its tolerance or lost consistency.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lamcoal
