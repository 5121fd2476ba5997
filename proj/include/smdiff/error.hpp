#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smdiff {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotConjugateClosed,
  ConvergenceFailure,
  InvalidOrder,
  Singular,
  UnstableRoot,
  NonFinite,
  Diverged,
  Unstable,
  InvalidQ,
  NoTruth,
  UnknownPreset,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Numerical failures map to CLI exit code 2, everything else to 1.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smdiff
