#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpme {

// Failure categories shared by every module. The C API maps these one-to-one
// onto fpme_status values, so append only.
enum class ErrorCode {
  InvalidArgument = 1,
  InvalidField,
  InvalidOrder,
  GridError,
  DimensionError,
  TooLargeForOracle,
  SingularPoint,
  NotNonnegative,
  NumericalBlowup,
  BoundaryContact,
  InsufficientData,
  OutOfDomain,
  NotApplicable,
  InvalidScale,
  ExcessiveDrift,
  OscillationNotReduced,
  ResolutionExhausted,
  ConfigError,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace fpme
