#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chernlab {

/// Failure categories shared by every module. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  NonZeroMean,
  GridMismatch,
  LatticeMismatch,
  InfeasibleDegree,
  NoConvergence,
  NotElliptic,
  PositivityLost,
  BoundViolated,
  NotConverged,
  BranchFailure,
  RhsNotPositive,
  MassMismatch,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::LatticeMismatch: return "LatticeMismatch";
    case ErrorKind::InfeasibleDegree: return "InfeasibleDegree";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::BranchFailure: return "BranchFailure";
    case ErrorKind::RhsNotPositive: return "RhsNotPositive";
    case ErrorKind::MassMismatch: return "MassMismatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of a numerical solve, as opposed to bad input.
  bool is_solver_failure() const noexcept {
    return kind_ == ErrorKind::NoConvergence || kind_ == ErrorKind::PositivityLost ||
           kind_ == ErrorKind::BoundViolated || kind_ == ErrorKind::NotConverged ||
           kind_ == ErrorKind::BranchFailure;
  }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace chernlab
