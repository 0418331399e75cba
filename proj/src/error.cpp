#include "tlsys/error.hpp"

namespace tlsys {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyComponent: return "EmptyComponent";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::DuplicateElement: return "DuplicateElement";
    case ErrorCode::NotAPartition: return "NotAPartition";
    case ErrorCode::NoPartition: return "NoPartition";
    case ErrorCode::CouplingMismatch: return "CouplingMismatch";
    case ErrorCode::IncompatibleCarriers: return "IncompatibleCarriers";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonNumericLabel: return "NonNumericLabel";
    case ErrorCode::MissingSourceArtifact: return "MissingSourceArtifact";
    case ErrorCode::IncompatibleSupport: return "IncompatibleSupport";
    case ErrorCode::MissingMeasure: return "MissingMeasure";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::IncompatibleMorphism: return "IncompatibleMorphism";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::MissingOrder: return "MissingOrder";
    case ErrorCode::MissingKernel: return "MissingKernel";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::HeterogeneousSetting: return "HeterogeneousSetting";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ResolutionError: return "ResolutionError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace tlsys
