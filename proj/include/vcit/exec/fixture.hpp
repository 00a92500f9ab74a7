#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "vcit/exec/plan.hpp"
#include "vcit/sim/dummy.hpp"

namespace vcit::exec {

/// "Specified time" since the last needle change, counted in probing cycles.
struct NeedleLog {
  std::uint64_t last_replacement_cycle = 0;
  std::uint64_t current_cycle = 0;
  std::uint64_t window_cycles = 0;

  bool fresh() const {
    return current_cycle >= last_replacement_cycle &&
           current_cycle - last_replacement_cycle <= window_cycles;
  }
};

struct Fixture {
  std::string name;
  sim::Bench bench;  // product model (unpowered) and needles
  prober::ProtectionLimits protection;
  std::optional<RailSenseConfig> rail_sense;
  Plan plan;
  NeedleLog needle_log;
  std::optional<sim::DummyUutSpec> dummy;
  checks::SignatureCatalog catalog;
  std::size_t probers = 1;
  double meter_noise = 0.0;  // V rms, seeded per session

  void validate() const;
  /// The product as seen with its supply on.
  sim::UutModel powered_uut() const;
};

/// JSON fixture; schema in docs/fixture.md. Errors carry Errc::Config.
Fixture parse_fixture(std::string_view json_text);
Fixture load_fixture(const std::filesystem::path& path);

/// Standalone region object {"normals": [[...], ...], "offsets": [...]};
/// each row is one face normal, scaled to unit length with its offset.
checks::HalfSpaceRegion parse_region(std::string_view json_text);

}  // namespace vcit::exec
