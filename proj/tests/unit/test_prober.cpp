#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "builders.hpp"
#include "vcit/error.hpp"
#include "vcit/prober/prober.hpp"

using namespace vcit;
using namespace vcit::testing;
using prober::CaptureRecord;
using prober::ProtectionLimits;
using prober::StimulusWaveform;

namespace {

StimulusWaveform waveform(sim::DriveMode mode, std::vector<double> samples, double dt,
                          std::vector<sim::PadId> pads = {"P1"}) {
  return StimulusWaveform{mode, std::move(samples), dt, std::move(pads)};
}

sim::Bench diode_bench(double contact_ohms) {
  sim::Bench b{single_pad(series_diode(diode())), {}};
  b.contacts["P1"] = contact(contact_ohms);
  return b;
}

sim::Bench resistor_bench(double ohms) {
  sim::Bench b{single_pad(sim::PadCircuit{sim::Resistive{ohms, sim::Rail::Gnd}, 0.0}), {}};
  b.contacts["P1"] = contact(0.1);
  return b;
}

sim::Bench rc_bench() {
  sim::Bench b{single_pad(sim::PadCircuit{sim::OpenPad{}, 1e-6}), {}};
  b.contacts["P1"] = contact(1e3);
  return b;
}

}  // namespace

TEST(Waveform, TextRoundTrip) {
  auto wf = waveform(sim::DriveMode::Voltage, {0.0, 0.1, -2.5e-3, 1.0 / 3.0}, 1e-4, {"P1", "IN1"});
  const std::string txt = prober::format_waveform(wf);
  EXPECT_EQ(txt, "voltage 1e-04 P1 IN1\n0\n0.1\n-0.0025\n0.3333333333333333\n");
  auto back = prober::parse_waveform(txt);
  EXPECT_EQ(back.mode, wf.mode);
  EXPECT_EQ(back.dt, wf.dt);
  EXPECT_EQ(back.target_pads, wf.target_pads);
  EXPECT_EQ(back.samples, wf.samples);
  EXPECT_EQ(prober::format_waveform(back), txt);
}

TEST(Waveform, ParserSkipsCommentsAndRejectsJunk) {
  auto wf = prober::parse_waveform("# ramp\ncurrent 1e-3 P1\n\n1e-3\r\n2e-3\n");
  EXPECT_EQ(wf.samples, (std::vector<double>{1e-3, 2e-3}));
  EXPECT_THROW(prober::parse_waveform("current 1e-3 P1\n"), Error);           // no samples
  EXPECT_THROW(prober::parse_waveform("current 0 P1\n1\n"), Error);           // dt
  EXPECT_THROW(prober::parse_waveform("amps 1e-3 P1\n1\n"), Error);           // mode
  EXPECT_THROW(prober::parse_waveform("current 1e-3 P1\n1 2\n"), Error);      // two levels
  EXPECT_THROW(prober::parse_waveform("current 1e-3 P1 P1\n1\n"), Error);     // duplicate pad
  EXPECT_THROW(prober::parse_waveform("current 1e-3 P1\nnan\n"), Error);      // not finite
}

TEST(Execute, DiodePadOneMilliamp) {
  auto bench = diode_bench(0.1);
  auto caps = prober::execute(waveform(sim::DriveMode::Current, {1e-3}, 1e-3), {}, bench);
  ASSERT_EQ(caps.size(), 1u);
  const auto& c = caps[0];
  EXPECT_NEAR(c.measured_voltage[0], 0.6547400711931154, 1e-6);
  EXPECT_NEAR(c.source_voltage[0], 0.6548400711931154, 1e-6);
  EXPECT_NEAR(c.measured_current[0], 1e-3, 1e-12);
  EXPECT_FALSE(c.protection_tripped);
  EXPECT_FALSE(c.trip_index.has_value());
}

TEST(Execute, OpenContactTripsAtCompliance) {
  auto bench = diode_bench(0.1);
  bench.contacts["P1"].resistance = std::numeric_limits<double>::infinity();
  ProtectionLimits lim{2.0, 50e-3};
  auto caps = prober::execute(waveform(sim::DriveMode::Current, {1e-3}, 1e-3), lim, bench);
  const auto& c = caps[0];
  EXPECT_TRUE(c.protection_tripped);
  ASSERT_TRUE(c.trip_index.has_value());
  EXPECT_EQ(*c.trip_index, 0u);
  EXPECT_EQ(c.source_voltage[0], 2.0);
  EXPECT_NEAR(c.measured_voltage[0], 0.0, 1e-9);
  EXPECT_NEAR(c.measured_current[0], 0.0, 1e-9);
}

TEST(Execute, ClampAndContinue) {
  auto bench = resistor_bench(1e3);
  // 10 mA into 1 kOhm wants ~10 V; the 5 V limit holds from sample 1 on.
  auto caps = prober::execute(waveform(sim::DriveMode::Current, {1e-3, 10e-3, 2e-3}, 1e-3),
                              {5.0, 50e-3}, bench);
  const auto& c = caps[0];
  ASSERT_EQ(c.sample_count(), 3u);
  EXPECT_EQ(*c.trip_index, 1u);
  EXPECT_EQ(c.source_voltage[1], 5.0);
  EXPECT_NEAR(c.measured_voltage[2], 2.0, 1e-6);
}

TEST(Execute, OverRangeLevelIsClamped) {
  auto bench = resistor_bench(10.0);
  auto caps = prober::execute(waveform(sim::DriveMode::Current, {0.2}, 1e-3), {5.0, 50e-3}, bench);
  EXPECT_EQ(caps[0].applied[0], 50e-3);
  EXPECT_TRUE(caps[0].protection_tripped);
  EXPECT_LE(std::abs(caps[0].measured_current[0]), 50e-3);
}

TEST(Execute, ZeroWaveformZeroCapture) {
  auto bench = diode_bench(0.1);
  bench.uut.pads.push_back({"P2", sim::PadCircuit{sim::Resistive{470.0, sim::Rail::Gnd}, 1e-9}});
  for (auto mode : {sim::DriveMode::Current, sim::DriveMode::Voltage}) {
    auto caps =
        prober::execute(waveform(mode, std::vector<double>(8, 0.0), 1e-6, {"P1", "P2"}), {}, bench);
    for (const auto& c : caps) {
      EXPECT_FALSE(c.protection_tripped);
      for (std::size_t i = 0; i < c.sample_count(); ++i) {
        EXPECT_EQ(c.measured_voltage[i], 0.0);
        EXPECT_EQ(c.measured_current[i], 0.0);
        EXPECT_EQ(c.source_voltage[i], 0.0);
      }
    }
  }
}

TEST(Execute, UnknownPad) {
  auto bench = diode_bench(0.1);
  try {
    prober::execute(waveform(sim::DriveMode::Current, {1e-3}, 1e-3, {"Q9"}), {}, bench);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownPad);
  }
}

TEST(Execute, SynchronizationUnderPermutation) {
  // A memoryless pad answers sample i from level i alone, so permuting the
  // program must permute the record the same way.
  auto bench = resistor_bench(1e3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> level(-3e-3, 3e-3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(16);
    for (auto& x : s) x = level(rng);
    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> p(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[perm[i]];

    auto a = prober::execute(waveform(sim::DriveMode::Current, s, 1e-3), {}, bench)[0];
    auto b = prober::execute(waveform(sim::DriveMode::Current, p, 1e-3), {}, bench)[0];
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(b.applied[i], a.applied[perm[i]]);
      EXPECT_EQ(b.measured_voltage[i], a.measured_voltage[perm[i]]);
      EXPECT_EQ(b.measured_current[i], a.measured_current[perm[i]]);
      EXPECT_NEAR(a.measured_voltage[i], a.applied[i] * 1e3, 1e-6);
    }
  }
}

TEST(Execute, ProtectionBoundsHoldOnRandomBenches) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    sim::Bench bench;
    sim::PadCircuit circ;
    switch (trial % 4) {
      case 0: circ.kind = sim::SeriesDiode{diode(1e-14, 1.0 + u(rng), 0.02585, 10 * u(rng))}; break;
      case 1: circ.kind = sim::Resistive{std::pow(10.0, 1 + 5 * u(rng)), sim::Rail::Gnd}; break;
      case 2: circ.kind = sim::OpenPad{}; break;
      default: circ.kind = sim::Led{diode(1e-19, 2.0, 0.02585, 5.0), "red"}; break;
    }
    bench.uut = single_pad(circ);
    bench.contacts["P1"] = contact(u(rng) < 0.2 ? 1e7 : std::pow(10.0, -2 + 4 * u(rng)));
    ProtectionLimits lim{0.5 + 5 * u(rng), 1e-4 + 20e-3 * u(rng)};
    const auto mode = u(rng) < 0.5 ? sim::DriveMode::Current : sim::DriveMode::Voltage;
    const double span = mode == sim::DriveMode::Current ? 40e-3 : 8.0;
    std::vector<double> s(6);
    for (auto& x : s) x = span * (2 * u(rng) - 1);
    auto c = prober::execute(waveform(mode, s, 1e-3), lim, bench)[0];
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_LE(std::abs(c.measured_voltage[i]), lim.max_abs_voltage);
      EXPECT_LE(std::abs(c.measured_current[i]), lim.max_abs_current);
      EXPECT_LE(std::abs(c.source_voltage[i]), lim.max_abs_voltage);
    }
    EXPECT_EQ(c.protection_tripped, c.trip_index.has_value());
  }
}

TEST(Execute, PerturbationIsAddedAndClamped) {
  auto bench = resistor_bench(1e3);
  ProtectionLimits lim{1.5, 50e-3};
  auto caps = prober::execute(waveform(sim::DriveMode::Current, {1e-3, 1e-3}, 1e-3), lim, bench,
                              [](const sim::PadId&, std::size_t i, double) {
                                return i == 0 ? 0.05 : 1.0;
                              });
  EXPECT_NEAR(caps[0].measured_voltage[0], 1.05, 1e-6);
  EXPECT_EQ(caps[0].measured_voltage[1], 1.5);
  EXPECT_EQ(*caps[0].trip_index, 1u);
}

TEST(Execute, CapacitancePathIsTransient) {
  auto bench = rc_bench();
  auto c = prober::execute(waveform(sim::DriveMode::Voltage, std::vector<double>(3, 1.0), 1e-4),
                           {}, bench)[0];
  // Implicit Euler with dt/RC = 0.1: v_k = 1 - (1/1.1)^k.
  EXPECT_NEAR(c.measured_voltage[0], 1.0 - 1.0 / 1.1, 1e-9);
  EXPECT_NEAR(c.measured_voltage[2], 1.0 - std::pow(1.1, -3), 1e-9);
}

TEST(Charge, ConstantCurrentRectangle) {
  CaptureRecord c;
  c.dt = 1e-3;
  c.measured_current.assign(10, 1e-3);
  EXPECT_NEAR(prober::measure_charge(c), 10e-6, 1e-18);
}

TEST(Charge, ZeroCurrentIsZero) {
  CaptureRecord c;
  c.dt = 1e-3;
  c.measured_current.assign(5, 0.0);
  EXPECT_EQ(prober::measure_charge(c), 0.0);
  c.measured_current.clear();
  EXPECT_THROW(prober::measure_charge(c), Error);
}

TEST(Charge, RcChargingStoresCV) {
  // 20 time constants; Q = C*V = 1 uC.
  auto bench = rc_bench();
  auto c = prober::execute(waveform(sim::DriveMode::Voltage, std::vector<double>(2000, 1.0), 1e-5),
                           {}, bench)[0];
  EXPECT_NEAR(prober::measure_charge(c), 1e-6, 1e-12);
}

TEST(Charge, AdditiveOverConcatenation) {
  auto bench = rc_bench();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s(40);
  for (auto& x : s) x = u(rng);
  auto whole =
      prober::execute(waveform(sim::DriveMode::Voltage, s, 1e-5), {}, bench)[0];
  CaptureRecord a = whole, b = whole;
  a.measured_current.resize(17);
  b.measured_current.erase(b.measured_current.begin(), b.measured_current.begin() + 17);
  EXPECT_NEAR(prober::measure_charge(whole),
              prober::measure_charge(a) + prober::measure_charge(b), 1e-18);
}

TEST(CaptureText, RoundTripIsByteExact) {
  auto bench = diode_bench(0.1);
  bench.uut.pads.push_back({"P2", sim::PadCircuit{sim::Resistive{470.0, sim::Rail::Gnd}, 0.0}});
  bench.contacts["P2"] = contact(1e7);
  auto caps = prober::execute(
      waveform(sim::DriveMode::Current, {0.0, 1e-3, 3e-3}, 1e-3, {"P1", "P2"}), {2.0, 0.01}, bench);
  const auto txt = prober::serialize_captures(caps);
  auto back = prober::parse_captures(txt);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(prober::serialize_captures(back), txt);
  EXPECT_EQ(back[1].trip_index, caps[1].trip_index);
  EXPECT_EQ(back[0].measured_voltage, caps[0].measured_voltage);
  EXPECT_THROW(prober::parse_captures("capture P1 0.001 2 0 -\n0 0 0 0\n"), Error);
  EXPECT_THROW(prober::parse_captures("capture P1 0.001 1 1 -\n0 0 0 0\n"), Error);
}
