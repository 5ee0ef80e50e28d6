#pragma once

#include <stdexcept>
#include <string>

namespace cts {

// Base class for all failures raised by the engine.  Every subclass carries a
// human-readable message naming the offending quantity.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A member (or clustered member) has near-zero length.
class DegenerateElement : public Error {
public:
  using Error::Error;
};

// A force state that the constitutive model cannot represent, e.g. a
// compressive force at or beyond the axial-stiffness limit t <= -E*A.
class NonphysicalForce : public Error {
public:
  using Error::Error;
};

// Prestress solve requested a unique mode but the null space has dimension
// other than one.
class MultipleModes : public Error {
public:
  using Error::Error;
};

// A solved prestress violates the unilateral rules (string in compression or
// bar in tension).
class InfeasibleSign : public Error {
public:
  using Error::Error;
};

// The dense (generalized) eigenvalue solver failed to converge.
class EigSolverFailure : public Error {
public:
  using Error::Error;
};

// Damping calibration found no positive natural frequency to anchor to.
class InsufficientModes : public Error {
public:
  using Error::Error;
};

// The implicit time step failed to converge within the iteration budget.
class NewtonDivergence : public Error {
public:
  using Error::Error;
};

// A quasi-static trajectory point could not be realized.  Carries the failing
// deploy ratio and the reason.
class InfeasiblePoint : public Error {
public:
  enum class Cause { SignInfeasible, Unstable, NoUniqueMode };

  InfeasiblePoint(double c, Cause cause, const std::string& msg)
      : Error(msg), c_(c), cause_(cause) {}

  double c() const { return c_; }
  Cause cause() const { return cause_; }

private:
  double c_;
  Cause cause_;
};

// An actuation schedule was asked to cover deploy ratios outside the range
// spanned by the quasi-static trajectory it interpolates.
class RangeUncovered : public Error {
public:
  using Error::Error;
};

// A string group cannot be split into the requested number of equal arcs.
class IndivisibleClustering : public Error {
public:
  using Error::Error;
};

// Structure validation or configuration parsing failed.
class InvalidInput : public Error {
public:
  using Error::Error;
};

}  // namespace cts
