#pragma once

#include <stdexcept>
#include <string>

namespace litesr {

// Error taxonomy shared by the whole library. The C API maps these 1:1 onto
// litesr_status codes, so new values must be appended, never reordered.
enum class ErrorCode {
  argument = 1,
  shape,
  dtype,
  validation,
  state,
  io,
  parse,
  calibration,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace litesr
