#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypdiss {

enum class ErrorKind {
  SingularB00,
  InvalidParameter,
  NotFluidModel,
  NonUnitDirection,
  DimensionMismatch,
  EigensolverFailure,
  ClusterAmbiguity,
  NotSymmetrizable,
  GridEmpty,
  PrerequisiteMissing,
  LyapunovSolveFailure,
  NotDissipativeAtPoint,
  UnsupportedDataSpec,
  GridMismatch,
  DegenerateFit,
  InvalidEpsilon,
  PowerIterationDivergence,
  PrecheckFailed,
  DomainExit,
  CFLViolation,
  BlowUp,
  ModelLoad,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hypdiss
