#include "vcit/exec/scenario.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::exec {

Scenario parse_scenario(std::string_view body) {
  Scenario sc;
  auto lines = text::split_lines(body);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = text::trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = text::split_ws(line);
    auto bad = [&](const std::string& why) {
      return Error(Errc::Config, "scenario line " + std::to_string(n + 1) + ": " + why);
    };
    const auto& verb = tok[0];
    if (verb == "functional") {
      if (tok.size() == 2 && tok[1] == "pass") {
        sc.functional_pass = true;
        sc.failed_pads.clear();
      } else if (tok.size() >= 3 && tok[1] == "fail") {
        sc.functional_pass = false;
        sc.failed_pads.assign(tok.begin() + 2, tok.end());
      } else {
        throw bad("expected 'functional pass' or 'functional fail <pad>...'");
      }
    } else if (verb == "needles") {
      if (tok.size() != 2 || (tok[1] != "fresh" && tok[1] != "stale"))
        throw bad("expected 'needles fresh|stale'");
      sc.needles_fresh = tok[1] == "fresh";
    } else if (verb == "fault") {
      if (tok.size() < 5) throw bad("expected 'fault <stage> <needle|uut> <pad> <kind>'");
      Fault f;
      if (tok[1] == "setup")
        f.stage = FaultStage::Setup;
      else if (tok[1] == "functional")
        f.stage = FaultStage::Functional;
      else
        throw bad("fault stage is setup or functional");
      if (tok[2] == "needle")
        f.target = FaultTarget::Needle;
      else if (tok[2] == "uut")
        f.target = FaultTarget::Uut;
      else
        throw bad("fault target is needle or uut");
      f.pad = std::string(tok[3]);
      if (tok[4] == "open" && tok.size() == 5) {
        f.kind = FaultKind::Open;
      } else if (tok[4] == "short" && tok.size() == 5 && f.target == FaultTarget::Uut) {
        f.kind = FaultKind::Short;
      } else if (tok[4] == "wear" && tok.size() == 6 && f.target == FaultTarget::Needle) {
        f.kind = FaultKind::Wear;
        const long long c = text::parse_int(tok[5]);
        if (c < 0) throw bad("wear cycles must be >= 0");
        f.cycles = static_cast<std::uint64_t>(c);
      } else {
        throw bad("needle faults: open | wear <cycles>; uut faults: open | short");
      }
      sc.faults.push_back(f);
    } else if (verb == "operator") {
      if (tok.size() != 3 || (tok[2] != "confirm" && tok[2] != "abort"))
        throw bad("expected 'operator <prompt> confirm|abort'");
      sc.operator_script.emplace_back(
          std::string(tok[1]),
          tok[2] == "confirm" ? OperatorResponse::Confirmed : OperatorResponse::Aborted);
    } else {
      throw bad("unknown directive '" + std::string(verb) + "'");
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Config, "cannot open scenario '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ScriptedOperator scripted_operator(const Scenario& scenario) {
  ScriptedOperator op;
  for (const auto& [tag, r] : scenario.operator_script) op.script(tag, r);
  return op;
}

void apply_fault(const Fault& fault, sim::Bench& bench) {
  sim::Pad* pad = bench.uut.find(fault.pad);
  if (!pad) throw Error(Errc::UnknownPad, "fault names unknown pad '" + fault.pad + "'");
  if (fault.target == FaultTarget::Needle) {
    auto& c = bench.contacts[fault.pad];
    if (fault.kind == FaultKind::Open)
      c.resistance = std::numeric_limits<double>::infinity();
    else
      c = sim::wear_step(c, fault.cycles);
    return;
  }
  if (fault.kind == FaultKind::Open)
    pad->circuit.kind = sim::OpenPad{};
  else
    pad->circuit.kind = sim::Resistive{1.0, sim::Rail::Gnd};
}

}  // namespace vcit::exec
