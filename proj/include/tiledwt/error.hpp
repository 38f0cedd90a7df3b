#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tiledwt {

enum class ErrorCode {
  OddLength,
  TooShort,
  LengthMismatch,
  OddDimension,
  DimensionMismatch,
  NotDivisible,
  CorruptPyramid,
  InvalidArgument,
  NegativeDistance,
  EmptyInput,
  BadMagic,
  TruncatedData,
  MaxvalUnsupported,
  MalformedHeader,
  MalformedData,
  VersionUnsupported,
  BadHeader,
  BadLabel,
  DuplicatePath,
  BadSize,
  ExtentTooLarge,
  IoFailure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OddLength: return "OddLength";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::CorruptPyramid: return "CorruptPyramid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::MaxvalUnsupported: return "MaxvalUnsupported";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedData: return "MalformedData";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::ExtentTooLarge: return "ExtentTooLarge";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; `code()` lets
// callers (the CLI in particular) map failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tiledwt
