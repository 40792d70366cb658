#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace vgs {

enum class ErrorCode {
  InvalidSpec,
  PackingInfeasible,
  InsufficientSamples,
  SingularPoint,
  ScattererTooLarge,
  InvalidTarget,
  DimensionMismatch,
  NotParaxial,
  NoPeakFound,
  EmptyTrace,
  OutOfDomain,
  TooFewShifts,
  InvalidConfig,
  IoError,
  CorruptFile,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (e.g. scatterers that are large for the band) go
// through a process-wide sink. The default prints to stderr.
using WarningSink = std::function<void(const std::string&)>;
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& msg);

}  // namespace vgs
