#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vcit/checks/checks.hpp"

namespace vcit::exec {

enum class CheckKind { Single, Diff, Shape, Classify, Corr, RailSense };

std::string_view to_string(CheckKind kind);
CheckKind parse_check_kind(std::string_view text);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

/// One entry of a VCIT battery as written in the fixture.
struct CheckSpec {
  CheckKind kind = CheckKind::Single;
  std::vector<sim::PadId> pads;
  sim::DriveMode mode = sim::DriveMode::Current;
  std::vector<double> levels;   // one capture per level
  std::size_t samples = 4;      // per capture
  double dt = 1e-3;
  std::vector<Window> windows;  // single: 1, diff: levels - 1
  std::optional<checks::HalfSpaceRegion> region;  // shape
  std::string expect;                             // classify: expected tag
  // corr: sine drive offset + amplitude*sin, reference = the drive itself
  double offset = 0.0;
  double amplitude = 0.0;
  double threshold = 0.9;

  std::string describe() const;
};

struct Plan {
  std::vector<CheckSpec> setup;
  std::vector<CheckSpec> diagnosis;
  std::vector<CheckSpec> cleanup;
};

struct RailSenseConfig {
  std::map<sim::PadId, double> inject;  // A per pad
  sim::Rail rail = sim::Rail::Vcc;
  Window band{0.1, 0.5};
};

/// Everything a battery needs besides the CheckSpec itself.
struct CheckContext {
  const sim::Bench* bench = nullptr;
  prober::ProberPort* port = nullptr;  // product probers
  prober::ProtectionLimits limits;
  const RailSenseConfig* rail_sense = nullptr;
  const checks::SignatureCatalog* catalog = nullptr;
  prober::Perturbation perturb;  // meter offset, also applied to rail readings
};

/// Pads a check touches; a rail-sense check touches its injected pads.
std::set<sim::PadId> check_pads(const CheckSpec& spec, const RailSenseConfig* rail_sense);

/// Pads a failed check points at: the failing subjects when they are pads,
/// otherwise every pad the check touches.
std::set<sim::PadId> implicated_pads(const CheckSpec& spec, const checks::VcitVerdict& verdict,
                                     const RailSenseConfig* rail_sense);

checks::VcitVerdict run_check(const CheckSpec& spec, const CheckContext& ctx);
checks::VcitVerdict run_battery(const std::vector<CheckSpec>& battery, const CheckContext& ctx);

/// Battery entries touching any of `pads`; per-pad checks are narrowed to
/// those pads.
std::vector<CheckSpec> restrict_to(const std::vector<CheckSpec>& battery,
                                   const std::set<sim::PadId>& pads,
                                   const RailSenseConfig* rail_sense);

}  // namespace vcit::exec
