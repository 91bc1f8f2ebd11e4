#include "sigseg/error.hpp"

namespace sigseg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedPgm: return "MalformedPgm";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadTargetSize: return "BadTargetSize";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::BadHyperparams: return "BadHyperparams";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::UnlabeledSample: return "UnlabeledSample";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace sigseg
