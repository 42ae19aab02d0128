#ifndef SLICEHUB_ERROR_HPP
#define SLICEHUB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace slicehub {

enum class ErrorCode {
  MalformedStl,
  EmptyMesh,
  InvalidProfile,
  BackendFailure,
  ParseFailure,
  TooFewLevels,
  FractionTooSmall,
  InvertedBound,
  EmptyGrid,
  TooFewSamples,
  DegenerateDesign,
  ParallelismOutOfRange,
  UnknownBatch,
  IndexOutOfRange,
  UnknownModel,
  NoMetadata,
  RejectedInterpolated,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// HTTP layer and the CLI can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace slicehub

#endif  // SLICEHUB_ERROR_HPP
