#pragma once

#include <stdexcept>
#include <string>

namespace phd {

enum class ErrorCode {
  InvalidArgument,
  MissingFile,
  MalformedHeader,
  InconsistentFrames,
  EmptyDirectory,
  TruncatedPayload,
  DimensionMismatch,
  EmptyInput,
  BadMagic,
  VersionMismatch,
  ChecksumFailure,
  IoFailure,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-checkable category next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phd
