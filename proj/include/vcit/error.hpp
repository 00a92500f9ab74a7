#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vcit {

enum class Errc {
  InvalidArgument,
  UnknownPad,
  NonConvergence,
  NoPathToRail,
  NotPoweredModel,
  DegenerateLevels,
  LengthMismatch,
  DimensionMismatch,
  OperatorAborted,
  Config,
  Protocol,
  Transport,
  Remote,
};

std::string_view to_string(Errc code);

/// Single exception type for the whole engine. NonConvergence carries the
/// KCL residual of the last iterate.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<double> residual = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<double> residual() const noexcept { return residual_; }

 private:
  Errc code_;
  std::optional<double> residual_;
};

}  // namespace vcit
