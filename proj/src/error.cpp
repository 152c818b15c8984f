#include "hypdiss/error.hpp"

namespace hypdiss {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularB00: return "SingularB00";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NotFluidModel: return "NotFluidModel";
    case ErrorKind::NonUnitDirection: return "NonUnitDirection";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::ClusterAmbiguity: return "ClusterAmbiguity";
    case ErrorKind::NotSymmetrizable: return "NotSymmetrizable";
    case ErrorKind::GridEmpty: return "GridEmpty";
    case ErrorKind::PrerequisiteMissing: return "PrerequisiteMissing";
    case ErrorKind::LyapunovSolveFailure: return "LyapunovSolveFailure";
    case ErrorKind::NotDissipativeAtPoint: return "NotDissipativeAtPoint";
    case ErrorKind::UnsupportedDataSpec: return "UnsupportedDataSpec";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorKind::PowerIterationDivergence: return "PowerIterationDivergence";
    case ErrorKind::PrecheckFailed: return "PrecheckFailed";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::ModelLoad: return "ModelLoad";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hypdiss
