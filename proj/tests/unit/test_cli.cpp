#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "bus_harness.hpp"

namespace fs = std::filesystem;
using vcit::testing::slurp;

namespace {

const std::string kRoot = VCIT_SOURCE_DIR;
const std::string kCli = VCIT_CLI_PATH;
const std::string kFixture = kRoot + "/fixtures/default.json";

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  FILE* p = ::popen((kCli + " " + args + " 2>/dev/null").c_str(), "r");
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("vcit-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string scenario(const std::string& name) { return kRoot + "/tests/data/scenarios/" + name; }

}  // namespace

TEST(Cli, HealthySessionPasses) {
  auto r = run("session --fixture " + kFixture + " --script " + scenario("healthy.scn"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "verdict Pass\n");
}

TEST(Cli, NtfSessionExitCodeAndLog) {
  const auto log = scratch("ntf.jsonl");
  auto r = run("session --fixture " + kFixture + " --script " +
               scenario("vcit-fail_needles-stale_dummy-fail.scn") + " --log " + log.string());
  EXPECT_EQ(r.code, 12);
  const auto text = slurp(log);
  for (const char* action : {"replace-needles", "rerun-selftest-after-replacement", "retest-product"}) {
    EXPECT_NE(r.out.find(std::string("action ") + action), std::string::npos) << action;
    EXPECT_NE(text.find(action), std::string::npos) << action;
  }
}

TEST(Cli, ExitCodePerVerdictKind) {
  EXPECT_EQ(run("session --fixture " + kFixture + " --script " +
                scenario("vcit-pass_needles-fresh_dummy-pass.scn")).code, 10);
  EXPECT_EQ(run("session --fixture " + kFixture + " --script " +
                scenario("vcit-fail_needles-fresh_dummy-pass.scn")).code, 11);
  EXPECT_EQ(run("session --fixture " + kFixture + " --script " + scenario("operator-abort.scn")).code, 13);
  EXPECT_EQ(run("session --fixture " + kFixture + " --fail P2").code, 10);
}

TEST(Cli, MissingFixtureWritesNoLog) {
  const auto log = scratch("missing.jsonl");
  fs::remove(log);
  auto r = run("session --fixture /nonexistent/fixture.json --log " + log.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(log));
}

TEST(Cli, InvalidFixtureIsConfigError) {
  const auto bad = scratch("bad.json");
  write(bad, "{\"name\": \"x\"}");
  EXPECT_EQ(run("session --fixture " + bad.string()).code, 2);
}

TEST(Cli, ScriptAndInteractiveAreExclusive) {
  EXPECT_EQ(run("session --fixture " + kFixture + " --script " + scenario("healthy.scn") +
                " --interactive").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, SameSeedSameLog) {
  const auto a = scratch("a.jsonl"), b = scratch("b.jsonl");
  const auto args = "session --fixture " + kFixture + " --seed 9 --script " +
                    scenario("vcit-fail_needles-stale_dummy-pass.scn") + " --log ";
  run(args + a.string());
  run(args + b.string());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST(Cli, InteractiveReadsTheTerminal) {
  auto r = run("session --fixture " + kFixture + " --fail P2 --interactive < /dev/null");
  EXPECT_EQ(r.code, 10);  // fresh needles: no prompt
}

TEST(Cli, Selftest) {
  EXPECT_EQ(run("selftest --fixture " + kFixture).code, 0);
  EXPECT_EQ(run("selftest --fixture " + kFixture + " --wear 20000").code, 1);
  auto j = nlohmann::json::parse(slurp(kFixture));
  j.erase("dummy");
  const auto p = scratch("nodummy.json");
  write(p, j.dump());
  EXPECT_EQ(run("selftest --fixture " + p.string()).code, 2);
}

TEST(Cli, ShapeCheck) {
  const auto region = scratch("region.json");
  write(region, R"({"normals": [[1, 0], [0, 1], [-1, -1]], "offsets": [1, 2, 0.5]})");
  auto r = run("check shape --region " + region.string() + " --values 0 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(run("check shape --region " + region.string() + " --values 3 0").code, 1);
  EXPECT_EQ(run("check shape --region " + region.string() + " --values 0 0 0").code, 2);
}

TEST(Cli, CorrOfFileAgainstItself) {
  const auto trace = scratch("trace.txt");
  write(trace, "# acquired\n0.1\n0.7\n-0.2\n0.4\n0.9\n");
  auto r = run("check corr --trace " + trace.string() + " --reference " + trace.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("score=1\n"), std::string::npos);
}

TEST(Cli, DiffOnSingleCaptureIsUsageError) {
  const auto caps = scratch("one.cap");
  write(caps, "capture P1 0.001 1 0 -\n0.001 0.7 0.65 0.001\n");
  EXPECT_EQ(run("check diff --captures " + caps.string() + " --window 0 1").code, 2);
  EXPECT_EQ(run("check single --captures " + caps.string() + " --window 0.6 0.7").code, 0);
}

TEST(Cli, BenchChecks) {
  EXPECT_EQ(run("check single --fixture " + kFixture + " --pad P1 --levels 1e-3 --window 0.55 0.75").code, 0);
  EXPECT_EQ(run("check diff --fixture " + kFixture + " --pad P1 --levels 1e-3 2e-3 --window 0.016 0.022").code, 0);
  EXPECT_EQ(run("check corr --fixture " + kFixture + " --pad IN1 --samples 64 --dt 1e-4").code, 0);
  EXPECT_EQ(run("check classify --fixture " + kFixture + " --values 3.1 --expect led-green").code, 0);
  EXPECT_EQ(run("check single --fixture " + kFixture + " --pad Q9 --levels 1e-3 --window 0 1").code, 2);
}

TEST(Cli, ServeMatchesLoopbackAndRejectsDoubleBind) {
  FILE* server = ::popen(("echo $$; exec " + kCli + " serve --fixture " + kFixture +
                          " --bus 127.0.0.1:0").c_str(), "r");
  ASSERT_NE(server, nullptr);
  char line[256];
  ASSERT_NE(std::fgets(line, sizeof line, server), nullptr);
  const pid_t pid = std::stoi(line);
  ASSERT_NE(std::fgets(line, sizeof line, server), nullptr);
  const std::string banner = line;
  const auto colon = banner.rfind(':');
  const auto port = std::stoi(banner.substr(colon + 1));
  const std::string addr = "127.0.0.1:" + std::to_string(port);

  for (const char* name : {"handshake.bus", "full-cycle.bus", "malformed.bus"}) {
    const auto path = kRoot + "/tests/data/bus/" + name;
    auto r = run("client --bus " + addr + " --script " + path);
    EXPECT_EQ(r.code, 0);
    auto farm = vcit::testing::default_farm(kRoot);
    EXPECT_EQ(r.out, vcit::bus::loopback_transcript(farm, slurp(path))) << name;
  }
  EXPECT_EQ(run("serve --fixture " + kFixture + " --bus " + addr).code, 3);

  ::kill(pid, SIGINT);
  std::string rest;
  while (std::fgets(line, sizeof line, server)) rest += line;
  const int status = ::pclose(server);
  EXPECT_EQ(rest, "stopped\n");
  EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
}

TEST(Cli, EnvironmentSuppliesBusAddress) {
  auto farm = vcit::testing::default_farm(kRoot);
  vcit::bus::TcpServer server(farm, {"127.0.0.1", 0});
  std::thread runner([&] { server.run(); });
  auto r = run("client --script " + kRoot + "/tests/data/bus/handshake.bus");
  EXPECT_NE(r.code, 0);
  ::setenv("VCIT_BUS", ("127.0.0.1:" + std::to_string(server.port())).c_str(), 1);
  r = run("client --script " + kRoot + "/tests/data/bus/handshake.bus");
  ::unsetenv("VCIT_BUS");
  server.request_stop();
  runner.join();
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "OK VCIT/1 probers 3\nOK 3\nOK bye\n");
}
