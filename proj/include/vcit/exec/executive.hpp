#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vcit/exec/event_log.hpp"
#include "vcit/exec/fixture.hpp"
#include "vcit/exec/scenario.hpp"

namespace vcit::exec {

// Operator prompt tags.
inline constexpr const char* kMountDummyPrompt = "mount-dummy";

// Follow-up actions recorded when the dummy self test fails.
inline constexpr const char* kActionReplaceNeedles = "replace-needles";
inline constexpr const char* kActionRerunSelftest = "rerun-selftest-after-replacement";
inline constexpr const char* kActionRetestProduct = "retest-product";

struct Verdict {
  VerdictKind kind = VerdictKind::Pass;
  std::vector<checks::VcitVerdict> evidence;
  std::vector<std::uint64_t> events;  // seq numbers of the deciding records
  std::vector<std::string> actions;
};

struct SessionResult {
  Verdict verdict;
  std::vector<SessionEvent> events;
};

/// Dummy battery: every signature drive through the current needles must
/// read inside its band.
checks::VcitVerdict dummy_self_test(const sim::DummyUutSpec& dummy, const sim::ContactMap& contacts,
                                    const prober::ProtectionLimits& limits,
                                    const prober::Perturbation& perturb = {});

struct SessionOptions {
  std::uint64_t seed = 0;
  prober::ProberPort* remote = nullptr;  // run product checks here instead of locally
};

/// One test cycle. Owns a copy of the fixture bench so scripted faults do
/// not leak between sessions.
class Session {
 public:
  Session(const Fixture& fixture, OperatorPort& op, SessionOptions options = {});
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  checks::VcitVerdict run_setup_integrity();
  Verdict diagnose_functional_failure(const std::vector<sim::PadId>& failed_pads);
  checks::VcitVerdict run_dummy_self_test();
  SessionResult run(const Scenario& scenario);

  sim::Bench& bench() { return bench_; }
  NeedleLog& needle_log() { return needle_log_; }
  const EventLog& log() const { return log_; }

 private:
  void enter(Phase next);
  CheckContext context();
  checks::VcitVerdict battery(const std::vector<CheckSpec>& specs, const char* label);
  void apply_faults(const Scenario& scenario, FaultStage stage);
  Verdict cleanup_then_finish(Verdict v);
  Verdict finish(Verdict v);

  const Fixture& fixture_;
  OperatorPort& op_;
  SessionOptions options_;
  sim::Bench bench_;
  NeedleLog needle_log_;
  EventLog log_;
  Phase phase_ = Phase::Idle;
  std::mt19937_64 rng_;
  bool product_mounted_ = true;
  std::set<sim::PadId> implicated_;  // from the last battery
  std::unique_ptr<prober::LocalProber> local_;
};

SessionResult run_session(const Fixture& fixture, const Scenario& scenario, OperatorPort& op,
                          SessionOptions options = {});

}  // namespace vcit::exec
