#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtransfer {

enum class ErrorKind {
  InvalidArgument,
  Io,
  InvalidUtf8,
  LineCountMismatch,
  EmptyCorpus,
  UnknownDirection,
  MissingSplit,
  EmptyFile,
  DimensionMismatch,
  OutOfVocabulary,
  LengthMismatch,
  ZeroBaseline,
  IncompleteGrid,
  HookFailure,
  MissingOutput,
  DegenerateData,
  MissingSeed,
  ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::InvalidUtf8: return "InvalidUtf8";
    case ErrorKind::LineCountMismatch: return "LineCountMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::UnknownDirection: return "UnknownDirection";
    case ErrorKind::MissingSplit: return "MissingSplit";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutOfVocabulary: return "OutOfVocabulary";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::IncompleteGrid: return "IncompleteGrid";
    case ErrorKind::HookFailure: return "HookFailure";
    case ErrorKind::MissingOutput: return "MissingOutput";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::MissingSeed: return "MissingSeed";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// All domain failures surface as this exception; `kind()` is what callers
// branch on, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rtransfer
