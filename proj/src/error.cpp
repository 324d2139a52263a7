#include "gcsim/error.hpp"

namespace gcsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateViewport: return "DEGENERATE_VIEWPORT";
    case ErrorCode::UnresolvedRef: return "UNRESOLVED_REF";
    case ErrorCode::MalformedSpec: return "MALFORMED_SPEC";
    case ErrorCode::DegenerateInput: return "DEGENERATE_INPUT";
    case ErrorCode::CycleDetected: return "CYCLE_DETECTED";
    case ErrorCode::NotAPermutation: return "NOT_A_PERMUTATION";
    case ErrorCode::BadConfig: return "BAD_CONFIG";
    case ErrorCode::KindMismatch: return "KIND_MISMATCH";
    case ErrorCode::EmptyAdmissibleSet: return "EMPTY_ADMISSIBLE_SET";
    case ErrorCode::ReferenceExhausted: return "REFERENCE_EXHAUSTED";
    case ErrorCode::EmptyTrajectory: return "EMPTY_TRAJECTORY";
    case ErrorCode::MissingAnnotation: return "MISSING_ANNOTATION";
    case ErrorCode::EmptyReference: return "EMPTY_REFERENCE";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::ProviderUnavailable: return "PROVIDER_UNAVAILABLE";
    case ErrorCode::NoPlan: return "NO_PLAN";
    case ErrorCode::UseBeforeCreate: return "E_USE_BEFORE_CREATE";
    case ErrorCode::MalformedTask: return "E_MALFORMED_TASK";
    case ErrorCode::UnknownFunction: return "E_UNKNOWN_FUNCTION";
    case ErrorCode::TransportClosed: return "TRANSPORT_CLOSED";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace gcsim
