#pragma once

#include <limits>
#include <map>
#include <vector>

#include "vcit/sim/uut.hpp"

namespace vcit::sim {

enum class DriveMode { Current, Voltage };

std::string_view to_string(DriveMode mode);
DriveMode parse_drive_mode(std::string_view text);

/// A source attached to a needle. `compliance` bounds the complementary
/// quantity: volts for a current source, amperes for a voltage source.
/// When the bound would be exceeded the source changes mode and holds the
/// bound exactly, the way a bench SMU does.
struct Drive {
  DriveMode mode = DriveMode::Current;
  double level = 0.0;
  double compliance = std::numeric_limits<double>::infinity();
};

using Stimulus = std::map<PadId, Drive>;

struct PadResponse {
  double probe_volts = 0.0;  // source terminal, prober side of the contact
  double pad_volts = 0.0;    // UUT side of the contact
  double amperes = 0.0;      // into the pad through the contact
  bool limited = false;      // the source sat at its compliance bound
};

struct DcSolution {
  std::map<PadId, PadResponse> pads;
  double vcc_volts = 0.0;
  double gnd_volts = 0.0;
  double residual = 0.0;  // max |KCL| over solved nodes, A
  int iterations = 0;

  double rail_volts(Rail rail) const { return rail == Rail::Vcc ? vcc_volts : gnd_volts; }
};

struct SolverOptions {
  int max_iterations = 200;
  double residual_tolerance = 1e-9;  // A
  double step_tolerance = 1e-9;      // V
};

/// DC operating point of the star network. Pads absent from `contacts` are
/// probed through an ideal needle.
DcSolution solve_dc(const UutModel& uut, const ContactMap& contacts, const Stimulus& stimulus,
                    const SolverOptions& options = {});

/// Voltage developed on `sense_rail` while currents are injected at `inject`.
/// `compliance` is the injecting sources' voltage bound.
double solve_rail_sense(const UutModel& uut, const ContactMap& contacts,
                        const std::map<PadId, double>& inject, Rail sense_rail,
                        double compliance = std::numeric_limits<double>::infinity(),
                        const SolverOptions& options = {});

/// Capacitor voltages carried between implicit-Euler steps.
struct TransientState {
  std::map<PadId, double> cap_volts;  // pad minus GND rail
  std::vector<double> guess;           // last node solution, warm start

  static TransientState at_rest(const UutModel& uut);
  static TransientState from_dc(const UutModel& uut, const DcSolution& dc);
};

struct TransientStep {
  TransientState next;
  DcSolution response;
};

TransientStep step_transient(const UutModel& uut, const ContactMap& contacts,
                             const Stimulus& stimulus, const TransientState& state, double dt,
                             const SolverOptions& options = {});

/// Supply current of a powered UUT for a given input pad voltage.
double powered_consumption(const UutModel& uut, double v_input);

}  // namespace vcit::sim
