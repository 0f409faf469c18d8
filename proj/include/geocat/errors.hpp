#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace geocat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs outside an operation's domain (bad parameters, supercritical law
/// handed to a subcritical-only routine, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact integer arithmetic would exceed the supported width.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Scheme or degree for which no evaluator exists.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical routine (ill-conditioned system, invariant broken
/// by rounding beyond tolerance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised when every Monte Carlo replica was censored by the event cap.
class EstimateUnavailable : public Error {
 public:
  EstimateUnavailable(std::uint64_t replicas, std::uint64_t censored)
      : Error("no replica reached extinction: " + std::to_string(censored) + " of " +
              std::to_string(replicas) + " censored by the event cap"),
        replicas_(replicas),
        censored_(censored) {}

  std::uint64_t replicas() const noexcept { return replicas_; }
  std::uint64_t censored() const noexcept { return censored_; }

 private:
  std::uint64_t replicas_;
  std::uint64_t censored_;
};

}  // namespace geocat
