#include "bohm/core.hpp"

namespace bohm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NodeEvaluation: return "NodeEvaluation";
    case ErrorCode::EnvelopeFailure: return "EnvelopeFailure";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::InsufficientFrames: return "InsufficientFrames";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::TooFewAlive: return "TooFewAlive";
    case ErrorCode::MismatchedParameters: return "MismatchedParameters";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace bohm
