#include "vcit/error.hpp"

namespace vcit {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnknownPad: return "UnknownPad";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NoPathToRail: return "NoPathToRail";
    case Errc::NotPoweredModel: return "NotPoweredModel";
    case Errc::DegenerateLevels: return "DegenerateLevels";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::OperatorAborted: return "OperatorAborted";
    case Errc::Config: return "Config";
    case Errc::Protocol: return "Protocol";
    case Errc::Transport: return "Transport";
    case Errc::Remote: return "Remote";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::optional<double> residual)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      residual_(residual) {}

}  // namespace vcit
