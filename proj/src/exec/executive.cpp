#include "vcit/exec/executive.hpp"

#include "vcit/error.hpp"

namespace vcit::exec {

using nlohmann::json;

checks::VcitVerdict dummy_self_test(const sim::DummyUutSpec& dummy, const sim::ContactMap& contacts,
                                    const prober::ProtectionLimits& limits,
                                    const prober::Perturbation& perturb) {
  const sim::Bench bench{dummy.model, contacts};
  checks::VcitVerdict out;
  for (const auto& sig : dummy.signatures) {
    prober::StimulusWaveform wf{sig.mode, std::vector<double>(4, sig.level), 1e-3, {sig.pad}};
    const auto cap = prober::execute(wf, limits, bench, perturb).at(0);
    checks::CheckDetail d;
    d.check = "dummy";
    d.subject = sig.pad;
    const double v = checks::steady_state(cap.measured_voltage);
    d.values = {v};
    d.pass = sig.lo <= v && v <= sig.hi;
    if (cap.protection_tripped) d.note = "protection tripped";
    out.add(std::move(d));
  }
  return out;
}

Session::Session(const Fixture& fixture, OperatorPort& op, SessionOptions options)
    : fixture_(fixture),
      op_(op),
      options_(options),
      bench_(fixture.bench),
      needle_log_(fixture.needle_log),
      rng_(options.seed) {}

void Session::enter(Phase next) {
  if (!transition_allowed(phase_, next))
    throw Error(Errc::InvalidArgument, "session cannot move from " +
                                           std::string(to_string(phase_)) + " to " +
                                           std::string(to_string(next)));
  phase_ = next;
  log_.append(next, "enter", "");
}

CheckContext Session::context() {
  CheckContext ctx;
  ctx.bench = &bench_;
  ctx.limits = fixture_.protection;
  ctx.rail_sense = fixture_.rail_sense ? &*fixture_.rail_sense : nullptr;
  ctx.catalog = &fixture_.catalog;
  if (fixture_.meter_noise > 0.0) {
    const double sigma = fixture_.meter_noise;
    ctx.perturb = [this, sigma](const sim::PadId&, std::size_t, double) {
      return std::normal_distribution<double>(0.0, sigma)(rng_);
    };
  }
  if (options_.remote) {
    ctx.port = options_.remote;
  } else {
    local_ = std::make_unique<prober::LocalProber>(bench_, ctx.perturb);
    ctx.port = local_.get();
  }
  return ctx;
}

checks::VcitVerdict Session::battery(const std::vector<CheckSpec>& specs, const char* label) {
  implicated_.clear();
  if (specs.empty()) log_.append(phase_, "warning", "empty-plan", json{{"battery", label}});
  const auto ctx = context();
  checks::VcitVerdict all;
  for (const auto& spec : specs) {
    const auto v = run_check(spec, ctx);
    if (!v.pass) {
      const auto pads = implicated_pads(spec, v, ctx.rail_sense);
      implicated_.insert(pads.begin(), pads.end());
    }
    all.merge(v);
  }
  auto detail = to_json(all);
  detail["battery"] = label;
  detail["implicated"] = implicated_;
  log_.append(phase_, "vcit", all.pass ? "pass" : "fail", std::move(detail));
  return all;
}

checks::VcitVerdict Session::run_setup_integrity() { return battery(fixture_.plan.setup, "setup"); }

checks::VcitVerdict Session::run_dummy_self_test() {
  if (!fixture_.dummy) throw Error(Errc::Config, "fixture defines no dummy UUT");
  const auto ctx = context();
  auto v = dummy_self_test(*fixture_.dummy, bench_.contacts, fixture_.protection, ctx.perturb);
  log_.append(phase_, "selftest", v.pass ? "pass" : "fail", to_json(v));
  return v;
}

Verdict Session::finish(Verdict v) {
  enter(Phase::Terminal);
  json detail{{"actions", v.actions}, {"evidence", v.events}};
  v.events.push_back(log_.append(Phase::Terminal, "verdict", std::string(to_string(v.kind)),
                                 std::move(detail)));
  return v;
}

Verdict Session::cleanup_then_finish(Verdict v) {
  enter(Phase::Cleanup);
  if (product_mounted_) {
    v.evidence.push_back(battery(fixture_.plan.cleanup, "cleanup"));
    v.events.push_back(log_.events().back().seq);
  } else {
    log_.append(phase_, "skipped", "product-not-mounted");
  }
  return finish(std::move(v));
}

Verdict Session::diagnose_functional_failure(const std::vector<sim::PadId>& failed_pads) {
  enter(Phase::VcitDiagnosis);
  Verdict v;
  const std::set<sim::PadId> pads(failed_pads.begin(), failed_pads.end());
  const auto specs = restrict_to(fixture_.plan.diagnosis, pads,
                                 fixture_.rail_sense ? &*fixture_.rail_sense : nullptr);
  v.evidence.push_back(battery(specs, "diagnosis"));
  v.events.push_back(log_.events().back().seq);
  if (v.evidence.back().pass) {
    v.kind = VerdictKind::UutFailFunctional;
    return cleanup_then_finish(std::move(v));
  }

  const bool fresh = needle_log_.fresh();
  v.events.push_back(log_.append(
      phase_, "needle-window", fresh ? "fresh" : "stale",
      json{{"last_replacement_cycle", needle_log_.last_replacement_cycle},
           {"current_cycle", needle_log_.current_cycle},
           {"window_cycles", needle_log_.window_cycles}}));
  if (fresh) {
    v.kind = VerdictKind::UutFailInterface;
    return cleanup_then_finish(std::move(v));
  }

  enter(Phase::AwaitDummyMount);
  log_.append(phase_, "prompt", kMountDummyPrompt);
  const auto answer = op_.ask(kMountDummyPrompt);
  v.events.push_back(log_.append(phase_, "response", std::string(to_string(answer)),
                                 json{{"prompt", kMountDummyPrompt}}));
  if (answer == OperatorResponse::Aborted) {
    v.kind = VerdictKind::FixtureFault;
    return finish(std::move(v));
  }
  product_mounted_ = false;

  enter(Phase::DummySelfTest);
  v.evidence.push_back(run_dummy_self_test());
  v.events.push_back(log_.events().back().seq);
  if (v.evidence.back().pass) {
    v.kind = VerdictKind::UutFailInterface;
    return finish(std::move(v));
  }

  enter(Phase::NeedleReplacement);
  for (const char* action : {kActionReplaceNeedles, kActionRerunSelftest, kActionRetestProduct}) {
    log_.append(phase_, "maintenance", action);
    v.actions.emplace_back(action);
  }
  v.kind = VerdictKind::NtfDetected;
  return finish(std::move(v));
}

void Session::apply_faults(const Scenario& scenario, FaultStage stage) {
  static constexpr const char* kTarget[] = {"needle", "uut"};
  static constexpr const char* kKind[] = {"open", "short", "wear"};
  for (const auto& f : scenario.faults) {
    if (f.stage != stage) continue;
    apply_fault(f, bench_);
    json detail{{"target", kTarget[static_cast<int>(f.target)]},
                {"pad", f.pad},
                {"kind", kKind[static_cast<int>(f.kind)]}};
    if (f.kind == FaultKind::Wear) detail["cycles"] = f.cycles;
    log_.append(phase_, "fault", "applied", std::move(detail));
  }
}

SessionResult Session::run(const Scenario& scenario) {
  for (const auto& pad : scenario.failed_pads)
    if (!bench_.uut.find(pad))
      throw Error(Errc::Config, "scenario fails unknown pad '" + pad + "'");
  if (scenario.needles_fresh) {
    auto& n = needle_log_;
    if (*scenario.needles_fresh)
      n.last_replacement_cycle = n.current_cycle;
    else
      n.current_cycle = n.last_replacement_cycle + n.window_cycles + 1;
  }

  enter(Phase::Setup);
  apply_faults(scenario, FaultStage::Setup);
  const auto setup = run_setup_integrity();
  const std::uint64_t setup_seq = log_.events().back().seq;
  Verdict v;
  if (!setup.pass) {
    const std::vector<sim::PadId> failed(implicated_.begin(), implicated_.end());
    v = diagnose_functional_failure(failed);
    v.evidence.insert(v.evidence.begin(), setup);
    v.events.insert(v.events.begin(), setup_seq);
    return {std::move(v), log_.events()};
  }

  enter(Phase::FunctionalRun);
  apply_faults(scenario, FaultStage::Functional);
  log_.append(phase_, "functional", scenario.functional_pass ? "pass" : "fail",
              json{{"failed_pads", scenario.failed_pads}});
  if (!scenario.functional_pass) {
    v = diagnose_functional_failure(scenario.failed_pads);
    v.evidence.insert(v.evidence.begin(), setup);
    v.events.insert(v.events.begin(), setup_seq);
    return {std::move(v), log_.events()};
  }
  v.kind = VerdictKind::Pass;
  v.evidence.push_back(setup);
  v.events.push_back(setup_seq);
  v = cleanup_then_finish(std::move(v));
  return {std::move(v), log_.events()};
}

SessionResult run_session(const Fixture& fixture, const Scenario& scenario, OperatorPort& op,
                          SessionOptions options) {
  Session s(fixture, op, options);
  return s.run(scenario);
}

}  // namespace vcit::exec
