#ifndef KHESS_ERRORS_HPP
#define KHESS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace khess {

// An operation was called outside the regime where it is defined
// (e.g. the energy identity away from the Sobolev exponent).
class NotApplicableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature failed to reach its tolerance; carries the achieved estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_rel)
      : std::runtime_error(what), achieved_rel_error(achieved_rel) {}
  double achieved_rel_error;
};

// Non-recoverable numerical failure (step-count blowup, overflow, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace khess

#endif
