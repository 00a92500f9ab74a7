#pragma once

// Small constructors shared by the unit tests.

#include <random>

#include "vcit/sim/dummy.hpp"
#include "vcit/sim/solver.hpp"

namespace vcit::testing {

inline sim::DiodeModel diode(double is = 1e-14, double n = 1.0, double vt = 0.02585,
                             double rs = 0.0) {
  return sim::DiodeModel{is, n, vt, rs};
}

inline sim::UutModel single_pad(sim::PadCircuit circuit, const std::string& id = "P1") {
  sim::UutModel uut;
  uut.pads.push_back({id, std::move(circuit)});
  return uut;
}

inline sim::PadCircuit series_diode(sim::DiodeModel d,
                                    sim::Polarity pol = sim::Polarity::Forward) {
  return sim::PadCircuit{sim::SeriesDiode{d, pol, sim::Rail::Gnd}, 0.0};
}

inline sim::ContactState contact(double ohms, double rate = 0.0, double threshold = 1e6) {
  return sim::ContactState{ohms, 0, rate, threshold};
}

inline sim::Drive amps(double a, double compliance = std::numeric_limits<double>::infinity()) {
  return sim::Drive{sim::DriveMode::Current, a, compliance};
}

inline sim::Drive volts(double v, double compliance = std::numeric_limits<double>::infinity()) {
  return sim::Drive{sim::DriveMode::Voltage, v, compliance};
}

/// Three ESD-pair pads feeding a sensed VCC rail, the shape of the shipped
/// rail-sense fixture.
inline sim::UutModel esd_rail_fixture(int pads = 3) {
  sim::UutModel uut;
  uut.vcc = sim::Sensed{12e-3, 2e-3, 100.0};
  for (int i = 1; i <= pads; ++i) {
    sim::EsdPair esd{diode(1e-14, 1.0, 0.02585, 1.0), diode(1e-14, 1.0, 0.02585, 1.0)};
    uut.pads.push_back({"P" + std::to_string(i), sim::PadCircuit{esd, 0.0}});
  }
  return uut;
}

}  // namespace vcit::testing
