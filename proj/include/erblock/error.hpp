#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace erblock {

/// Failure categories shared by every module; mirrored one-to-one by the C API
/// status codes.
enum class ErrorCode {
  Io,
  Schema,
  Parse,
  DuplicateId,
  Consistency,
  Referential,
  Parameter,
  Domain,
  Vocabulary,
  SizeGuard,
  Config,
  Usage,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace erblock
