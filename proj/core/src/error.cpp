#include "vgstar/error.hpp"

#include <iostream>
#include <mutex>

namespace vgs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::PackingInfeasible: return "PackingInfeasible";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::ScattererTooLarge: return "ScattererTooLarge";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotParaxial: return "NotParaxial";
    case ErrorCode::NoPeakFound: return "NoPeakFound";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::TooFewShifts: return "TooFewShifts";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptFile: return "CorruptFile";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  WarningSink old = std::move(g_sink);
  g_sink = std::move(sink);
  return old;
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  if (g_sink) g_sink(msg);
}

}  // namespace vgs
