// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "../unit/builders.hpp"
#include "../unit/bus_harness.hpp"
#include "vcit/exec/executive.hpp"

using namespace vcit;
using vcit::testing::slurp;

namespace {

const std::string kRoot = VCIT_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

exec::Fixture fixture() { return exec::load_fixture(kRoot + "/fixtures/default.json"); }

// 1. Rail-sense band on the shipped fixture.
Outcome rail_sense_band() {
  auto fx = fixture();
  const auto& rs = *fx.rail_sense;
  const double compliance = fx.protection.max_abs_voltage;
  const double good = sim::solve_rail_sense(fx.bench.uut, fx.bench.contacts, rs.inject, rs.rail, compliance);

  // The same reading through the plan's rail_sense check.
  exec::CheckSpec spec;
  spec.kind = exec::CheckKind::RailSense;
  prober::LocalProber local(fx.bench);
  exec::CheckContext ctx{&fx.bench, &local, fx.protection, &rs, &fx.catalog, {}};
  const auto check = exec::run_check(spec, ctx);

  double worst_open = 0.0;
  bool open_checks_fail = true;
  for (const auto& [pad, amps] : rs.inject) {
    auto bench = fx.bench;
    bench.contacts[pad].resistance = std::numeric_limits<double>::infinity();
    const double v = sim::solve_rail_sense(bench.uut, bench.contacts, rs.inject, rs.rail, compliance);
    worst_open = std::max(worst_open, std::abs(v));
    prober::LocalProber open_port(bench);
    exec::CheckContext open_ctx{&bench, &open_port, fx.protection, &rs, &fx.catalog, {}};
    open_checks_fail = open_checks_fail && !exec::run_check(spec, open_ctx).pass;
  }
  const bool pass = good >= 0.1 && good <= 0.5 && check.pass && worst_open < 10e-3 && open_checks_fail;
  return {pass, fmt("all-good %.1f mV in [100, 500] mV; worst single open contact %.2f mV < 10 mV "
                    "over %zu injected contacts",
                    good * 1e3, worst_open * 1e3, rs.inject.size())};
}

// Pad voltage of a series diode at current i, by bisection on the current
// law (independent of the Newton solver).
double shockley_pad(double is, double n, double vt, double rs, double i) {
  double lo = 0.0, hi = 5.0;
  for (int k = 0; k < 200; ++k) {
    const double v = 0.5 * (lo + hi);
    const double vj = v - i * rs;
    const double id = vj <= 0 ? -1.0 : is * std::expm1(vj / (n * vt));
    (id > i ? hi : lo) = v;
  }
  return 0.5 * (lo + hi);
}

// 2. Solver against the closed-form Shockley inversion.
Outcome solver_correctness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_dv = 0.0, worst_res = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double is = std::pow(10.0, -16 + 6 * u(rng));
    const double n = 1.0 + u(rng);
    const double rs = 10 * u(rng);
    const double rc = 0.05 + 2 * u(rng);
    const double i = std::pow(10.0, -6 + 4 * u(rng));
    const auto uut = vcit::testing::single_pad(
        vcit::testing::series_diode(vcit::testing::diode(is, n, 0.02585, rs)));
    const auto sol = sim::solve_dc(uut, {{"P1", vcit::testing::contact(rc)}}, {{"P1", vcit::testing::amps(i)}});
    // Closed form: Vpad = n Vt ln(1 + I/Is) + I Rs.
    const double closed = n * 0.02585 * std::log1p(i / is) + i * rs;
    worst_dv = std::max({worst_dv, std::abs(sol.pads.at("P1").pad_volts - closed),
                         std::abs(shockley_pad(is, n, 0.02585, rs, i) - closed)});
    worst_res = std::max(worst_res, sol.residual);
  }
  return {worst_dv < 1e-6 && worst_res < 1e-9,
          fmt("1000 random diodes: max |dV| %.2e V (< 1e-6), max KCL residual %.2e A (< 1e-9)",
              worst_dv, worst_res)};
}

prober::CaptureRecord capture_at(const sim::Bench& bench, double amps,
                                 const prober::Perturbation& perturb = {}) {
  prober::StimulusWaveform wf{sim::DriveMode::Current, std::vector<double>(8, amps), 1e-3, {"P1"}};
  return prober::execute(wf, {}, bench, perturb)[0];
}

// 3. Differential identity and offset invariance.
Outcome differential_identity() {
  double worst = 0.0;
  bool invariant = true;
  for (double n : {1.0, 1.5, 2.0}) {
    sim::Bench bench{vcit::testing::single_pad(
                         vcit::testing::series_diode(vcit::testing::diode(1e-14, n, 0.02585, 0.0))),
                     {{"P1", vcit::testing::contact(0.1)}}};
    const double expect = n * 0.02585 * std::numbers::ln2;
    std::vector<prober::CaptureRecord> caps{capture_at(bench, 1e-3), capture_at(bench, 2e-3)};
    for (const auto& window : {checks::DeltaWindow{expect - 1e-4, expect + 1e-4},
                               checks::DeltaWindow{expect + 1e-3, expect + 2e-3}}) {
      const auto base = checks::differential_test(caps, {window});
      worst = std::max(worst, std::abs(base.details[0].values[0] - expect));
      auto shifted = caps;
      for (auto& c : shifted)
        for (auto& v : c.measured_voltage) v += 0.05;
      const auto meter = [](const sim::PadId&, std::size_t, double) { return 0.05; };
      std::vector<prober::CaptureRecord> offset_caps{capture_at(bench, 1e-3, meter),
                                                     capture_at(bench, 2e-3, meter)};
      invariant = invariant && checks::differential_test(shifted, {window}).pass == base.pass &&
                  checks::differential_test(offset_caps, {window}).pass == base.pass;
    }
  }
  return {worst < 1e-6 && invariant,
          fmt("n in {1, 1.5, 2}: max |dV - n Vt ln2| %.2e V (< 1e-6); verdicts %s under +50 mV offset",
              worst, invariant ? "unchanged" : "CHANGED")};
}

// 4. Shape test against brute-force membership.
Outcome shape_oracle() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 6), faces(1, 12);
  int disagreements = 0, inside = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto d = static_cast<std::size_t>(dim(rng));
    const auto m = static_cast<std::size_t>(faces(rng));
    std::vector<std::vector<double>> normals(m, std::vector<double>(d));
    std::vector<double> offsets(m);
    for (std::size_t j = 0; j < m; ++j) {
      long double norm = 0;
      for (auto& c : normals[j]) {
        c = g(rng);
        norm += static_cast<long double>(c) * c;
      }
      for (auto& c : normals[j]) c = static_cast<double>(c / std::sqrt(norm));
      offsets[j] = g(rng);
    }
    const auto region = checks::HalfSpaceRegion::normalized(normals, offsets);
    checks::MeasurementVector x;
    for (std::size_t i = 0; i < d; ++i) {
      x.values.push_back(0.8 * g(rng));
      x.labels.push_back("x" + std::to_string(i));
    }
    bool brute = true;
    for (std::size_t j = 0; j < m; ++j) {
      long double s = 0;
      for (std::size_t i = d; i-- > 0;) s += static_cast<long double>(normals[j][i]) * x.values[i];
      brute = brute && s <= offsets[j];
    }
    const bool got = checks::shape_test(x, region).pass;
    disagreements += got != brute;
    inside += brute;
  }
  return {disagreements == 0,
          fmt("10000 random (polytope, point) pairs, %d inside: %d disagreements", inside, disagreements)};
}

// 5. Correlation properties.
Outcome correlation_properties() {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g;
  double lo = 1, hi = -1;
  int affine_misses = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 63);
    checks::CorrelationRef ref{std::vector<double>(n), 1e-3, 0.0};
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref.reference[i] = g(rng);
      x[i] = g(rng) + (t % 4) * 0.5 * ref.reference[i];
    }
    const double r = checks::correlation_score(x, ref);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    const double a = std::exp(2 * g(rng)), b = 5 * g(rng);
    std::vector<double> y;
    for (double v : ref.reference) y.push_back(a * v + b);
    affine_misses += checks::correlation_score(y, ref) != 1.0;
  }
  double worst_orth = 0;
  for (std::size_t n : {16u, 64u, 256u, 1000u}) {
    checks::CorrelationRef ref{{}, 1e-3, 0.5};
    std::vector<double> s;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      s.push_back(std::sin(ph));
      ref.reference.push_back(std::cos(ph));
    }
    worst_orth = std::max(worst_orth, std::abs(checks::correlation_score(s, ref)));
  }
  auto fx = fixture();
  const auto corr = std::find_if(fx.plan.setup.begin(), fx.plan.setup.end(),
                                 [](const auto& s) { return s.kind == exec::CheckKind::Corr; });
  auto bench = fx.bench;
  bench.uut = fx.powered_uut();
  prober::StimulusWaveform wf{sim::DriveMode::Voltage, {}, corr->dt, corr->pads};
  for (std::size_t i = 0; i < corr->samples; ++i)
    wf.samples.push_back(corr->offset + corr->amplitude * std::sin(2 * std::numbers::pi * static_cast<double>(i) /
                                                                    static_cast<double>(corr->samples)));
  const checks::CorrelationRef ref{wf.samples, wf.dt, corr->threshold};
  const auto good = checks::correlation_test(bench, wf, ref, fx.protection);
  bench.contacts[corr->pads[0]].resistance = std::numeric_limits<double>::infinity();
  const auto open = checks::correlation_test(bench, wf, ref, fx.protection);
  const double open_score = *open.details[0].score;
  const bool pass = lo >= -1 && hi <= 1 && affine_misses == 0 && worst_orth <= 1e-9 &&
                    open_score == 0.0 && !open.pass && good.pass;
  return {pass, fmt("10000 pairs in [%.3f, %.3f]; affine copies not 1.0: %d; max |sin.cos| %.1e; "
                    "powered %s good %.4f, open %.1f (%s)",
                    lo, hi, affine_misses, worst_orth, corr->pads[0].c_str(), *good.details[0].score,
                    open_score, open.pass ? "pass" : "fail")};
}

// 6. Golden verdict table over the eight branches.
Outcome golden_table() {
  auto fx = fixture();
  std::istringstream table(slurp(kRoot + "/tests/data/scenarios/golden.tsv"));
  std::string line;
  int rows = 0, matched = 0, replayed = 0, ntf = 0, ntf_actions = 0, audited = 0;
  while (std::getline(table, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++rows;
    const auto tab = line.find('\t');
    const auto sc = exec::load_scenario(kRoot + "/tests/data/scenarios/" + line.substr(0, tab));
    auto op = exec::scripted_operator(sc);
    const auto r = exec::run_session(fx, sc, op, {42});
    matched += exec::to_string(r.verdict.kind) == line.substr(tab + 1);
    replayed += exec::replay_verdict(exec::parse_jsonl(exec::to_jsonl(r.events))) == r.verdict.kind;
    audited += exec::audit_log(r.events).empty();
    if (r.verdict.kind == exec::VerdictKind::NtfDetected) {
      ++ntf;
      ntf_actions += r.verdict.actions == std::vector<std::string>{exec::kActionReplaceNeedles,
                                                                   exec::kActionRerunSelftest,
                                                                   exec::kActionRetestProduct};
    }
  }
  const bool pass = rows == 8 && matched == 8 && replayed == 8 && audited == 8 && ntf >= 1 &&
                    ntf_actions == ntf;
  return {pass, fmt("%d/%d branches match the committed table; replay %d/%d; audit clean %d/%d; "
                    "NTF branches %d with all three maintenance actions %d",
                    matched, rows, replayed, rows, audited, rows, ntf, ntf_actions)};
}

// 7. Bus conformance.
Outcome protocol_conformance() {
  int scripts = 0, identical = 0, errs = 0, leaks = 0, reply_mismatch = 0;
  for (const auto& path : vcit::testing::bus_corpus(kRoot)) {
    ++scripts;
    const auto script = slurp(path);
    auto a = vcit::testing::default_farm(kRoot);
    auto b = vcit::testing::default_farm(kRoot);
    identical += vcit::testing::socket_transcript(a, script) == bus::loopback_transcript(b, script);
    auto c = vcit::testing::default_farm(kRoot);
    const auto report = vcit::testing::check_atomicity(c, script);
    errs += static_cast<int>(report.errors);
    leaks += static_cast<int>(report.violations.size());
    reply_mismatch += report.replies != report.commands;
  }
  // Upload then read back through STATUS over TCP.
  auto farm = vcit::testing::default_farm(kRoot);
  bus::TcpServer server(farm, {"127.0.0.1", 0});
  std::thread runner([&] { server.run(); });
  bool echo = false;
  {
    auto conn = bus::connect_tcp({"127.0.0.1", server.port()});
    bus::Command up{bus::Verb::Waveform, {"5"}, {"voltage 2.5E-4 IN1", "1.65", "+2.85", "0.450", "1.65e0", "-0"}};
    bus::client_call(up, *conn);
    const auto st = bus::client_call({bus::Verb::Status, {}, {}}, *conn);
    echo = std::vector<std::string>(st.block.end() - 6, st.block.end()) == up.payload;
    bus::client_call({bus::Verb::Quit, {}, {}}, *conn);
  }
  server.request_stop();
  runner.join();
  const bool pass = scripts > 0 && identical == scripts && leaks == 0 && reply_mismatch == 0 && echo;
  return {pass, fmt("%d/%d corpus scripts byte-identical over loopback and TCP; %d ERR replies, %d "
                    "changed farm state; one reply per command in %d/%d; waveform echo %s",
                    identical, scripts, errs, leaks, scripts - reply_mismatch, scripts,
                    echo ? "byte-exact" : "DIFFERS")};
}

// 8. Deterioration prediction under uniform needle wear.
Outcome deterioration() {
  auto fx = fixture();
  std::vector<double> readings;
  std::vector<bool> dummy;
  double r_flip = 0;
  for (int k = 0; k <= 200; ++k) {
    const auto cycles = static_cast<std::uint64_t>(k) * 500;  // 0.5 ohm per step
    auto bench = fx.bench;
    for (auto& [pad, c] : bench.contacts) c = sim::wear_step(c, cycles);
    prober::StimulusWaveform wf{sim::DriveMode::Voltage, std::vector<double>(4, 0.8), 1e-3, {"P1"}};
    const auto cap = prober::execute(wf, fx.protection, bench)[0];
    readings.push_back(checks::single_level_test(cap, 0.0, 1.0).details[0].values[0]);
    dummy.push_back(exec::dummy_self_test(*fx.dummy, bench.contacts, fx.protection).pass);
    if (k > 0 && dummy[k - 1] && !dummy[k]) r_flip = bench.contacts.begin()->second.resistance;
  }
  int rises = 0, flips = 0;
  for (std::size_t k = 1; k < readings.size(); ++k) {
    rises += !(readings[k] < readings[k - 1]);
    flips += dummy[k] != dummy[k - 1];
  }
  const bool pass = rises == 0 && flips == 1 && dummy.front() && !dummy.back();
  return {pass, fmt("0.1 to 100.1 ohm in 201 steps: P1 reading %.4f -> %.4f V with %d non-decreasing "
                    "steps; dummy self test flips %d time(s), pass -> fail at %.1f ohm",
                    readings.front(), readings.back(), rises, flips, r_flip)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria{
      {"rail-sense band", rail_sense_band, 1.0},
      {"solver vs Shockley", solver_correctness, 10.0},
      {"differential identity", differential_identity, 0.0},
      {"shape oracle", shape_oracle, 5.0},
      {"correlation properties", correlation_properties, 0.0},
      {"state-machine golden table", golden_table, 0.0},
      {"protocol conformance", protocol_conformance, 0.0},
      {"deterioration prediction", deterioration, 0.0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || s < c.budget_s;
    const bool ok = o.pass && in_time;
    failed += !ok;
    std::printf("criterion %zu %s: %s (%s) [%.3f s%s]\n", i + 1, ok ? "PASS" : "FAIL", c.name,
                o.summary.c_str(), s, c.budget_s > 0 ? fmt(" of %.0f s", c.budget_s).c_str() : "");
  }
  return failed == 0 ? 0 : 1;
}
