#pragma once

#include <stdexcept>
#include <string>

namespace corrdet {

enum class ErrorKind {
  NotFull,
  DimMismatch,
  EmptyCalibration,
  LengthMismatch,
  DegenerateVariance,
  Diverged,
  NoData,
  InvalidConfig,
  Io,
  Format,
};

const char* to_string(ErrorKind kind);

/// Every failure the library reports. `kind` lets callers map errors to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace corrdet
