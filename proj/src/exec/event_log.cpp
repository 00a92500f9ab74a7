#include "vcit/exec/event_log.hpp"

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::exec {

using nlohmann::json;

namespace {

constexpr Phase kPhases[] = {Phase::Idle,          Phase::Setup,          Phase::FunctionalRun,
                             Phase::VcitDiagnosis, Phase::AwaitDummyMount, Phase::DummySelfTest,
                             Phase::NeedleReplacement, Phase::Cleanup,   Phase::Terminal};

constexpr VerdictKind kVerdicts[] = {VerdictKind::Pass, VerdictKind::UutFailInterface,
                                     VerdictKind::UutFailFunctional, VerdictKind::NtfDetected,
                                     VerdictKind::FixtureFault};

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "Idle";
    case Phase::Setup: return "Setup";
    case Phase::FunctionalRun: return "FunctionalRun";
    case Phase::VcitDiagnosis: return "VcitDiagnosis";
    case Phase::AwaitDummyMount: return "AwaitDummyMount";
    case Phase::DummySelfTest: return "DummySelfTest";
    case Phase::NeedleReplacement: return "NeedleReplacement";
    case Phase::Cleanup: return "Cleanup";
    case Phase::Terminal: return "Terminal";
  }
  return "?";
}

Phase parse_phase(std::string_view text) {
  for (auto p : kPhases)
    if (to_string(p) == text) return p;
  throw Error(Errc::InvalidArgument, "unknown phase '" + std::string(text) + "'");
}

bool transition_allowed(Phase from, Phase to) {
  switch (from) {
    case Phase::Idle: return to == Phase::Setup;
    case Phase::Setup: return to == Phase::FunctionalRun || to == Phase::VcitDiagnosis;
    case Phase::FunctionalRun: return to == Phase::Cleanup || to == Phase::VcitDiagnosis;
    case Phase::VcitDiagnosis: return to == Phase::Cleanup || to == Phase::AwaitDummyMount;
    case Phase::AwaitDummyMount: return to == Phase::DummySelfTest || to == Phase::Terminal;
    case Phase::DummySelfTest: return to == Phase::Terminal || to == Phase::NeedleReplacement;
    case Phase::NeedleReplacement: return to == Phase::Terminal;
    case Phase::Cleanup: return to == Phase::Terminal;
    case Phase::Terminal: return false;
  }
  return false;
}

std::string_view to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Pass: return "Pass";
    case VerdictKind::UutFailInterface: return "UutFail(interface)";
    case VerdictKind::UutFailFunctional: return "UutFail(functional)";
    case VerdictKind::NtfDetected: return "NtfDetected";
    case VerdictKind::FixtureFault: return "FixtureFault";
  }
  return "?";
}

VerdictKind parse_verdict_kind(std::string_view text) {
  for (auto k : kVerdicts)
    if (to_string(k) == text) return k;
  throw Error(Errc::InvalidArgument, "unknown verdict '" + std::string(text) + "'");
}

json to_json(const checks::VcitVerdict& v) {
  json checks_out = json::array();
  for (const auto& d : v.details) {
    json c{{"check", d.check}, {"subject", d.subject}, {"pass", d.pass}, {"values", d.values}};
    if (!d.violated.empty()) c["violated"] = d.violated;
    if (d.score) c["score"] = *d.score;
    if (!d.note.empty()) c["note"] = d.note;
    checks_out.push_back(std::move(c));
  }
  return json{{"pass", v.pass}, {"checks", std::move(checks_out)}};
}

std::uint64_t EventLog::append(Phase phase, std::string action, std::string outcome,
                               json detail) {
  const std::uint64_t seq = events_.size();
  events_.push_back({seq, phase, std::move(action), std::move(outcome), std::move(detail)});
  return seq;
}

std::string to_jsonl(const std::vector<SessionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    json j{{"seq", e.seq},
           {"phase", to_string(e.phase)},
           {"action", e.action},
           {"outcome", e.outcome},
           {"detail", e.detail}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SessionEvent> parse_jsonl(std::string_view body) {
  std::vector<SessionEvent> out;
  for (const auto& line : text::split_lines(body)) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      SessionEvent e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.phase = parse_phase(j.at("phase").get<std::string>());
      e.action = j.at("action").get<std::string>();
      e.outcome = j.at("outcome").get<std::string>();
      e.detail = j.at("detail");
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(Errc::InvalidArgument, std::string("session log line: ") + ex.what());
    }
  }
  return out;
}

std::optional<VerdictKind> replay_verdict(const std::vector<SessionEvent>& events) {
  std::optional<bool> functional, diagnosis, fresh, selftest;
  bool aborted = false;
  for (const auto& e : events) {
    if (e.action == "functional") functional = e.outcome == "pass";
    if (e.phase == Phase::VcitDiagnosis && e.action == "vcit") diagnosis = e.outcome == "pass";
    if (e.action == "needle-window") fresh = e.outcome == "fresh";
    if (e.action == "response" && e.outcome == "aborted") aborted = true;
    if (e.action == "selftest") selftest = e.outcome == "pass";
  }
  if (aborted) return VerdictKind::FixtureFault;
  if (selftest) return *selftest ? VerdictKind::UutFailInterface : VerdictKind::NtfDetected;
  if (diagnosis) {
    if (*diagnosis) return VerdictKind::UutFailFunctional;
    if (fresh && *fresh) return VerdictKind::UutFailInterface;
    return std::nullopt;
  }
  if (functional && *functional) return VerdictKind::Pass;
  return std::nullopt;
}

std::vector<std::string> audit_log(const std::vector<SessionEvent>& events) {
  std::vector<std::string> problems;
  Phase phase = Phase::Idle;
  bool awaiting_response = false;
  int verdicts = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string at = "event " + std::to_string(i) + ": ";
    if (e.seq != i) problems.push_back(at + "sequence number " + std::to_string(e.seq));
    if (e.action == "enter") {
      if (awaiting_response) problems.push_back(at + "transition before the operator answered");
      if (!transition_allowed(phase, e.phase))
        problems.push_back(at + "illegal transition " + std::string(to_string(phase)) + " -> " +
                           std::string(to_string(e.phase)));
      phase = e.phase;
      continue;
    }
    if (e.phase != phase)
      problems.push_back(at + "recorded in " + std::string(to_string(e.phase)) + " while in " +
                         std::string(to_string(phase)));
    if (e.action == "prompt") {
      if (awaiting_response) problems.push_back(at + "second prompt before a response");
      awaiting_response = true;
    } else if (e.action == "response") {
      if (!awaiting_response) problems.push_back(at + "response without a prompt");
      awaiting_response = false;
    } else if (e.action == "verdict") {
      ++verdicts;
      if (e.phase != Phase::Terminal) problems.push_back(at + "verdict outside Terminal");
      if (i + 1 != events.size()) problems.push_back(at + "records after the verdict");
    }
  }
  if (verdicts != 1) problems.push_back("log holds " + std::to_string(verdicts) + " verdicts");
  if (awaiting_response) problems.push_back("prompt left unanswered");
  return problems;
}

}  // namespace vcit::exec
