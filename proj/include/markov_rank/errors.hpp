#pragma once

#include <stdexcept>
#include <string>

namespace markov_rank {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be parsed in the declared format.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant (negative entry, bad row sum, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotIrreducible : public Error {
 public:
  using Error::Error;
};

class AperiodicityViolation : public Error {
 public:
  using Error::Error;
};

/// The hole-punched matrix is reducible where an analysis needs it irreducible.
class ReducibleAfterRemoval : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed; carries the best residual reached.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double best_residual, long iterations)
      : Error(what), best_residual_(best_residual), iterations_(iterations) {}

  double best_residual() const noexcept { return best_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  long iterations_;
};

/// All initial mass sits on the hole, so nothing survives even at n = 0.
class DegenerateInit : public Error {
 public:
  using Error::Error;
};

class RatesNotSeparated : public Error {
 public:
  using Error::Error;
};

class HorizonTooSmall : public Error {
 public:
  using Error::Error;
};

}  // namespace markov_rank
