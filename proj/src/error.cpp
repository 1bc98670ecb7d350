#include "aoipm/error.hpp"

namespace aoipm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateBins: return "degenerate-bins";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::EmptyRelation: return "empty-relation";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::InsufficientBaseline: return "insufficient-baseline";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::TrainingDiverged: return "training-diverged";
    case ErrorCode::Load: return "load";
    case ErrorCode::Alignment: return "alignment";
    case ErrorCode::EmptyFeatures: return "empty-features";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Checksum: return "checksum";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

ParseError::ParseError(ErrorCode code, std::size_t line, const std::string& what)
    : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace aoipm
