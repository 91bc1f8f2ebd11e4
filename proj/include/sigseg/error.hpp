#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sigseg {

enum class ErrorCode {
  MissingFile,
  MalformedPgm,
  MalformedManifest,
  DimensionMismatch,
  IoFailure,
  BadTargetSize,
  EmptySequence,
  MalformedFile,
  BadWindow,
  EmptySignal,
  BadHyperparams,
  ShapeMismatch,
  BadLabel,
  UnlabeledSample,
  EmptyDataset,
  EmptyInterval,
  DegenerateSegment,
  EmptyGroundTruth,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. what() is prefixed
// with the error code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sigseg
