#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vcit/checks/checks.hpp"

namespace vcit::exec {

enum class Phase {
  Idle,
  Setup,
  FunctionalRun,
  VcitDiagnosis,
  AwaitDummyMount,
  DummySelfTest,
  NeedleReplacement,
  Cleanup,
  Terminal,
};

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view text);

/// Edges of the session graph.
bool transition_allowed(Phase from, Phase to);

enum class VerdictKind { Pass, UutFailInterface, UutFailFunctional, NtfDetected, FixtureFault };

std::string_view to_string(VerdictKind k);
VerdictKind parse_verdict_kind(std::string_view text);

struct SessionEvent {
  std::uint64_t seq = 0;
  Phase phase = Phase::Idle;
  std::string action;
  std::string outcome;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const checks::VcitVerdict& v);

class EventLog {
 public:
  std::uint64_t append(Phase phase, std::string action, std::string outcome,
                       nlohmann::json detail = nlohmann::json::object());
  const std::vector<SessionEvent>& events() const { return events_; }

 private:
  std::vector<SessionEvent> events_;
};

// One JSON object per line: {"action","detail","outcome","phase","seq"}.
std::string to_jsonl(const std::vector<SessionEvent>& events);
std::vector<SessionEvent> parse_jsonl(std::string_view text);

/// Pure reducer: re-derives the terminal verdict from the branch outcomes in
/// the log, ignoring the recorded verdict record itself.
std::optional<VerdictKind> replay_verdict(const std::vector<SessionEvent>& events);

/// Structural problems in a log: sequence gaps, illegal transitions, prompts
/// without a response before the next transition, missing or repeated
/// verdict. Empty when the log is well formed.
std::vector<std::string> audit_log(const std::vector<SessionEvent>& events);

}  // namespace vcit::exec
