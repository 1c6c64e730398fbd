#pragma once

#include <stdexcept>
#include <string>

namespace gdiss {

enum class ErrorKind {
  kDimension,   // mismatched or invalid matrix sizes
  kDomain,      // value outside the admissible set (non-SPD, kappa <= 0, ...)
  kShape,       // structural property violated (symmetry, hermiticity)
  kNumerical,   // an iterative kernel failed to converge
  kStability,   // an operation required a Hurwitz matrix and did not get one
  kDivergence,  // time integration produced non-finite or unphysical values
  kInternal,    // a construction-time identity failed to hold
  kInput,       // malformed problem file or command-line value
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kStability: return "stability";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kInternal: return "internal";
    case ErrorKind::kInput: return "input";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a matrix that must be Hurwitz is not. Carries the largest real
/// part found so callers can report how far from stability the input was.
class NotHurwitzError : public Error {
 public:
  NotHurwitzError(const std::string& what, double max_real_part)
      : Error(ErrorKind::kStability, what), max_real_part_(max_real_part) {}

  double max_real_part() const noexcept { return max_real_part_; }

 private:
  double max_real_part_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace gdiss
