#include <CLI11.hpp>

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vcit/bus/client.hpp"
#include "vcit/bus/socket.hpp"
#include "vcit/exec/executive.hpp"
#include "vcit/text.hpp"

namespace {

using namespace vcit;

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

int verdict_exit(exec::VerdictKind kind) {
  switch (kind) {
    case exec::VerdictKind::Pass: return 0;
    case exec::VerdictKind::UutFailFunctional: return 10;
    case exec::VerdictKind::UutFailInterface: return 11;
    case exec::VerdictKind::NtfDetected: return 12;
    case exec::VerdictKind::FixtureFault: return 13;
  }
  return kRuntime;
}

int error_exit(const Error& e) {
  switch (e.code()) {
    case Errc::InvalidArgument:
    case Errc::UnknownPad:
    case Errc::DegenerateLevels:
    case Errc::LengthMismatch:
    case Errc::DimensionMismatch:
    case Errc::Config:
      return kUsage;
    default:
      return kRuntime;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Config, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whitespace-separated numbers; '#' starts a comment.
std::vector<double> read_numbers(const std::string& path) {
  std::vector<double> out;
  for (const auto& raw : text::split_lines(slurp(path))) {
    auto line = std::string_view(raw).substr(0, raw.find('#'));
    for (auto tok : text::split_ws(line)) out.push_back(text::parse_double(tok));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(v[i]);
  }
  return out;
}

void print_detail(const checks::CheckDetail& d, std::ostream& out) {
  out << d.check << ' ' << (d.subject.empty() ? "-" : d.subject) << ' ' << (d.pass ? "PASS" : "FAIL");
  if (!d.values.empty()) out << " values=" << join(d.values);
  if (d.score) out << " score=" << text::format_double(*d.score);
  if (!d.violated.empty()) {
    out << " violated=";
    for (std::size_t i = 0; i < d.violated.size(); ++i) out << (i ? "," : "") << d.violated[i];
  }
  if (!d.note.empty()) out << " (" << d.note << ')';
  out << '\n';
}

int report(const checks::VcitVerdict& v) {
  for (const auto& d : v.details) print_detail(d, std::cout);
  std::cout << (v.pass ? "PASS" : "FAIL") << '\n';
  return v.pass ? kOk : kCheckFailed;
}

std::string bus_address(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(std::string(bus::kAddressEnv).c_str()); env && *env) return env;
  return std::string(bus::kDefaultAddress);
}

struct SessionArgs {
  std::string fixture, script, log, bus;
  std::vector<std::string> fail_pads;
  std::uint64_t seed = 0;
  bool interactive = false;
};

int cmd_session(const SessionArgs& a) {
  auto fx = exec::load_fixture(a.fixture);
  exec::Scenario scenario;
  if (!a.script.empty()) {
    scenario = exec::load_scenario(a.script);
  } else if (!a.fail_pads.empty()) {
    scenario.functional_pass = false;
    scenario.failed_pads = a.fail_pads;
  }
  exec::ScriptedOperator scripted = exec::scripted_operator(scenario);
  exec::TerminalOperator terminal(std::cin, std::cerr);
  exec::OperatorPort& op = a.interactive ? static_cast<exec::OperatorPort&>(terminal) : scripted;

  exec::SessionOptions options{a.seed, nullptr};
  std::unique_ptr<bus::SocketStream> conn;
  std::unique_ptr<bus::RemoteProber> remote;
  if (!a.bus.empty()) {
    conn = bus::connect_tcp(bus::parse_address(a.bus));
    remote = std::make_unique<bus::RemoteProber>(*conn, 0);
    options.remote = remote.get();
  }
  auto result = exec::run_session(fx, scenario, op, options);
  if (!a.log.empty()) {
    std::ofstream out(a.log, std::ios::binary);
    if (!out) throw Error(Errc::Config, "cannot write log '" + a.log + "'");
    out << exec::to_jsonl(result.events);
  }
  const auto& v = result.verdict;
  std::cout << "verdict " << exec::to_string(v.kind) << '\n';
  for (const auto& action : v.actions) std::cout << "action " << action << '\n';
  for (const auto& evidence : v.evidence)
    for (const auto& d : evidence.details)
      if (!d.pass) print_detail(d, std::cout);
  return verdict_exit(v.kind);
}

int cmd_selftest(const std::string& fixture, std::uint64_t wear) {
  auto fx = exec::load_fixture(fixture);
  if (!fx.dummy) throw Error(Errc::Config, "fixture '" + fixture + "' has no dummy");
  auto contacts = fx.bench.contacts;
  for (auto& [pad, c] : contacts) c = sim::wear_step(c, wear);
  return report(exec::dummy_self_test(*fx.dummy, contacts, fx.protection));
}

struct CheckArgs {
  std::string fixture, captures, trace, reference, region, vector_file, expect;
  std::vector<std::string> pads;
  std::string mode = "current";
  std::vector<double> levels, window, values;
  std::size_t samples = 4;
  double dt = 1e-3, offset = 1.65, amplitude = 1.2, threshold = 0.9;
};

checks::MeasurementVector vector_values(const CheckArgs& a) {
  checks::MeasurementVector x;
  if (!a.vector_file.empty())
    x.values = read_numbers(a.vector_file);
  else
    x.values = a.values;
  if (x.values.empty()) throw Error(Errc::InvalidArgument, "give --values or --vector");
  for (std::size_t i = 0; i < x.values.size(); ++i) x.labels.push_back("x" + std::to_string(i));
  return x;
}

exec::Window window_of(const CheckArgs& a) {
  if (a.window.size() != 2) throw Error(Errc::InvalidArgument, "--window takes LO HI");
  return {a.window[0], a.window[1]};
}

int run_on_bench(const CheckArgs& a, exec::CheckSpec spec) {
  auto fx = exec::load_fixture(a.fixture);
  spec.pads = a.pads;
  spec.mode = sim::parse_drive_mode(a.mode);
  spec.samples = a.samples;
  spec.dt = a.dt;
  prober::LocalProber local(fx.bench);
  exec::CheckContext ctx;
  ctx.bench = &fx.bench;
  ctx.port = &local;
  ctx.limits = fx.protection;
  ctx.rail_sense = fx.rail_sense ? &*fx.rail_sense : nullptr;
  ctx.catalog = &fx.catalog;
  return report(exec::run_check(spec, ctx));
}

int cmd_check(const std::string& kind, const CheckArgs& a) {
  if (kind == "single" || kind == "diff") {
    const auto w = window_of(a);
    if (!a.captures.empty()) {
      auto caps = prober::parse_captures(slurp(a.captures));
      if (kind == "single") {
        checks::VcitVerdict v;
        for (const auto& c : caps) v.merge(checks::single_level_test(c, w.lo, w.hi));
        return report(v);
      }
      if (caps.size() < 2) throw Error(Errc::InvalidArgument, "diff needs at least two captures");
      std::vector<checks::DeltaWindow> windows(caps.size() - 1, {w.lo, w.hi});
      return report(checks::differential_test(caps, windows));
    }
    if (a.fixture.empty() || a.pads.empty())
      throw Error(Errc::InvalidArgument, "give --captures, or --fixture with --pad");
    exec::CheckSpec spec;
    spec.kind = kind == "single" ? exec::CheckKind::Single : exec::CheckKind::Diff;
    spec.levels = a.levels;
    if (kind == "single" && spec.levels.size() != 1)
      throw Error(Errc::InvalidArgument, "single takes one --levels value");
    if (kind == "diff" && spec.levels.size() < 2)
      throw Error(Errc::InvalidArgument, "diff needs at least two levels");
    spec.windows.assign(kind == "single" ? 1 : spec.levels.size() - 1, w);
    return run_on_bench(a, spec);
  }
  if (kind == "corr") {
    if (!a.trace.empty()) {
      checks::CorrelationRef ref{read_numbers(a.reference.empty() ? a.trace : a.reference), a.dt,
                                 a.threshold};
      const double score = checks::correlation_score(read_numbers(a.trace), ref);
      std::cout << "corr score=" << text::format_double(score) << '\n';
      const bool pass = score >= a.threshold;
      std::cout << (pass ? "PASS" : "FAIL") << '\n';
      return pass ? kOk : kCheckFailed;
    }
    if (a.fixture.empty() || a.pads.size() != 1)
      throw Error(Errc::InvalidArgument, "give --trace, or --fixture with one --pad");
    exec::CheckSpec spec;
    spec.kind = exec::CheckKind::Corr;
    spec.offset = a.offset;
    spec.amplitude = a.amplitude;
    spec.threshold = a.threshold;
    auto b = a;
    b.mode = "voltage";
    return run_on_bench(b, spec);
  }
  if (kind == "shape") {
    if (a.region.empty()) throw Error(Errc::InvalidArgument, "shape needs --region");
    auto region = exec::parse_region(slurp(a.region));
    return report(checks::shape_test(vector_values(a), region));
  }
  if (kind == "classify") {
    if (a.fixture.empty()) throw Error(Errc::InvalidArgument, "classify needs --fixture");
    auto fx = exec::load_fixture(a.fixture);
    const auto tag = checks::classify_signature(vector_values(a), fx.catalog);
    std::cout << "classify " << tag << '\n';
    const bool pass = a.expect.empty() ? tag != "unclassified" : tag == a.expect;
    std::cout << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kOk : kCheckFailed;
  }
  throw Error(Errc::InvalidArgument, "unknown check '" + kind + "'");
}

std::atomic<bus::TcpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->request_stop();
}

int cmd_serve(const std::string& fixture, const std::string& address) {
  auto fx = exec::load_fixture(fixture);
  bus::ProberFarm farm(fx.bench, fx.probers);
  const auto where = bus::parse_address(address);
  bus::TcpServer server(farm, where);
  g_server.store(&server);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << where.host << ':' << server.port() << " probers "
            << farm.size() << std::endl;
  server.run();
  g_server.store(nullptr);
  std::cout << "stopped" << std::endl;
  return kOk;
}

int cmd_client(const std::string& address, const std::string& script) {
  const std::string bytes = script.empty() || script == "-"
                                ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                : slurp(script);
  auto conn = bus::connect_tcp(bus::parse_address(address));
  conn->write(bytes);
  conn->shutdown_write();
  std::cout << conn->read_to_end() << std::flush;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Current-voltage integrity test bench"};
  app.require_subcommand(1);

  SessionArgs session;
  auto* s = app.add_subcommand("session", "Run one test cycle and report the verdict");
  s->add_option("--fixture", session.fixture, "Fixture JSON")->required()->check(CLI::ExistingFile);
  auto* script = s->add_option("--script", session.script, "Scenario script")->check(CLI::ExistingFile);
  auto* interactive =
      s->add_flag("--interactive", session.interactive, "Ask the operator on the terminal");
  script->excludes(interactive);
  s->add_option("--fail", session.fail_pads, "Pads whose functional test failed (no script)")
      ->excludes(script);
  s->add_option("--seed", session.seed, "Meter noise seed");
  s->add_option("--log", session.log, "Write the session log (JSON lines) here");
  s->add_option("--bus", session.bus, "Run product checks on prober 0 at host:port");

  std::string self_fixture;
  std::uint64_t wear = 0;
  auto* st = app.add_subcommand("selftest", "Run the dummy self test");
  st->add_option("--fixture", self_fixture, "Fixture JSON")->required()->check(CLI::ExistingFile);
  st->add_option("--wear", wear, "Wear every needle by this many cycles first");

  CheckArgs ca;
  std::string check_kind;
  auto* ck = app.add_subcommand("check", "Run one VCIT check");
  ck->add_option("kind", check_kind, "single | diff | corr | shape | classify")
      ->required()
      ->check(CLI::IsMember({"single", "diff", "corr", "shape", "classify"}));
  ck->add_option("--fixture", ca.fixture, "Fixture JSON")->check(CLI::ExistingFile);
  ck->add_option("--pad", ca.pads, "Pad(s) to drive");
  ck->add_option("--mode", ca.mode, "current | voltage")
      ->check(CLI::IsMember({"current", "voltage"}));
  ck->add_option("--levels", ca.levels, "Drive level(s)");
  ck->add_option("--window", ca.window, "Accepted LO HI")->expected(2);
  ck->add_option("--samples", ca.samples, "Samples per capture");
  ck->add_option("--dt", ca.dt, "Sample period, s");
  ck->add_option("--captures", ca.captures, "Capture text file")->check(CLI::ExistingFile);
  ck->add_option("--trace", ca.trace, "Acquired trace, one value per line")->check(CLI::ExistingFile);
  ck->add_option("--reference", ca.reference, "Reference trace")->check(CLI::ExistingFile);
  ck->add_option("--offset", ca.offset, "corr drive offset, V");
  ck->add_option("--amplitude", ca.amplitude, "corr drive amplitude, V");
  ck->add_option("--threshold", ca.threshold, "corr pass threshold");
  ck->add_option("--region", ca.region, "Region JSON")->check(CLI::ExistingFile);
  ck->add_option("--values", ca.values, "Measurement vector");
  ck->add_option("--vector", ca.vector_file, "Measurement vector file")->check(CLI::ExistingFile);
  ck->add_option("--expect", ca.expect, "classify: expected tag");

  std::string serve_fixture, serve_bus;
  auto* sv = app.add_subcommand("serve", "Expose the fixture's probers on the bus");
  sv->add_option("--fixture", serve_fixture, "Fixture JSON")->required()->check(CLI::ExistingFile);
  sv->add_option("--bus", serve_bus, "Listen address host:port (env VCIT_BUS)");

  std::string client_bus, client_script;
  auto* cl = app.add_subcommand("client", "Send a command script and print the replies");
  cl->add_option("--bus", client_bus, "Server address host:port (env VCIT_BUS)");
  cl->add_option("--script", client_script, "Request script, '-' for stdin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_session(session);
    if (*st) return cmd_selftest(self_fixture, wear);
    if (*ck) return cmd_check(check_kind, ca);
    if (*sv) return cmd_serve(serve_fixture, bus_address(serve_bus));
    if (*cl) return cmd_client(bus_address(client_bus), client_script);
  } catch (const Error& e) {
    std::cerr << "vcit: " << e.what() << '\n';
    return error_exit(e);
  } catch (const std::exception& e) {
    std::cerr << "vcit: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
