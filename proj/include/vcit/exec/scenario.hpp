#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vcit/exec/operator.hpp"
#include "vcit/sim/uut.hpp"

namespace vcit::exec {

enum class FaultStage { Setup, Functional };  // applied before that phase runs
enum class FaultTarget { Needle, Uut };
enum class FaultKind { Open, Short, Wear };

struct Fault {
  FaultStage stage = FaultStage::Functional;
  FaultTarget target = FaultTarget::Needle;
  sim::PadId pad;
  FaultKind kind = FaultKind::Open;
  std::uint64_t cycles = 0;  // wear only
};

/// Scripted inputs of one session. Text form, one directive per line:
///   functional pass | functional fail <pad>...
///   needles fresh | needles stale
///   fault setup|functional needle <pad> open | wear <cycles>
///   fault setup|functional uut <pad> open | short
///   operator <prompt-tag> confirm|abort
struct Scenario {
  bool functional_pass = true;
  std::vector<sim::PadId> failed_pads;
  std::optional<bool> needles_fresh;
  std::vector<Fault> faults;
  std::vector<std::pair<std::string, OperatorResponse>> operator_script;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Operator answering from the scenario's `operator` lines.
ScriptedOperator scripted_operator(const Scenario& scenario);

/// Mutates the bench the way the fault would: a lifted or worn needle, or a
/// damaged UUT pad (open, or shorted to GND through 1 ohm).
void apply_fault(const Fault& fault, sim::Bench& bench);

}  // namespace vcit::exec
