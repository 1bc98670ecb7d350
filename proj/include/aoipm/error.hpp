#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aoipm {

enum class ErrorCode {
  DegenerateBins,
  OutOfRange,
  Parse,
  EmptyRelation,
  EmptyInput,
  InsufficientBaseline,
  InsufficientData,
  TrainingDiverged,
  Load,
  Alignment,
  EmptyFeatures,
  InvalidArgument,
  Checksum,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Line-oriented parsers report the 1-based line that failed.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace aoipm
