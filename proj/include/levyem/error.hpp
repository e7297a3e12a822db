#pragma once

#include <stdexcept>
#include <string>

namespace levyem {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (bad alpha, empty input...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Numerical routine failed to reach its target accuracy.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// An experiment could not produce a usable result (too many aborted chains,
// too few checkpoints above the noise floor, ...).
class ExperimentError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] inline void fail_precondition(const std::string& msg) {
  throw PreconditionError(msg);
}
inline void require(bool ok, const std::string& msg) {
  if (!ok) fail_precondition(msg);
}
}  // namespace detail

}  // namespace levyem
