#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tlsys {

enum class ErrorCode {
  EmptyComponent,
  ArityMismatch,
  UnknownElement,
  DuplicateElement,
  NotAPartition,
  NoPartition,
  CouplingMismatch,
  IncompatibleCarriers,
  CapExceeded,
  EmptyDataset,
  NonNumericLabel,
  MissingSourceArtifact,
  IncompatibleSupport,
  MissingMeasure,
  MissingTruth,
  IncompatibleMorphism,
  SupportMismatch,
  MissingOrder,
  MissingKernel,
  InvalidMeasure,
  HeterogeneousSetting,
  InvalidSpec,
  ParseError,
  ResolutionError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace tlsys
