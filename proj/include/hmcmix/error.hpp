#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hmcmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidSpectrum,
  kInvalidBasis,
  kDimensionMismatch,
  kNumericalDivergence,
  kDomain,
  kConfig,
  kIo,
  kPrecondition,
  kSingularCovariance,
};

// Base exception for every failure raised by the library. The code is what
// crosses the C boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the integrator when a gradient or potential is not finite.
// Carries the phase point at which integration broke down.
class NumericalDivergence : public Error {
 public:
  NumericalDivergence(const std::string& what, Vector q, Vector p)
      : Error(ErrorCode::kNumericalDivergence, what),
        q_(std::move(q)),
        p_(std::move(p)) {}
  const Vector& position() const noexcept { return q_; }
  const Vector& momentum() const noexcept { return p_; }

 private:
  Vector q_;
  Vector p_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

inline void require_dim(Eigen::Index got, Eigen::Index want,
                        const char* what) {
  if (got != want) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": expected dimension " + std::to_string(want) +
             ", got " + std::to_string(got));
  }
}

}  // namespace hmcmix
