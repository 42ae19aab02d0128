#include "slicehub/error.hpp"

namespace slicehub {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedStl: return "MalformedStl";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::FractionTooSmall: return "FractionTooSmall";
    case ErrorCode::InvertedBound: return "InvertedBound";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::ParallelismOutOfRange: return "ParallelismOutOfRange";
    case ErrorCode::UnknownBatch: return "UnknownBatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::NoMetadata: return "NoMetadata";
    case ErrorCode::RejectedInterpolated: return "RejectedInterpolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace slicehub
