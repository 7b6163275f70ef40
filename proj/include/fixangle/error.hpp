#pragma once

#include <stdexcept>
#include <string>

namespace fixangle {

enum class ErrorCode {
  Config = 1,
  InvalidWavenumber,
  ResonantLattice,
  GridMismatch,
  NoContraction,
  DenseTooLarge,
  DegenerateFrequency,
  OracleFailure,
  NotConverged,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the C API maps it to fa_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fixangle
