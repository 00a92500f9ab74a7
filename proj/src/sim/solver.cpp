#include "vcit/sim/solver.hpp"

#include <algorithm>
#include <cmath>

#include "network.hpp"
#include "vcit/error.hpp"

namespace vcit::sim {

namespace {

constexpr double kMinContactOhms = 1e-6;

struct ActiveDrive {
  std::size_t pad_index = 0;
  Drive requested;
  Drive effective;
  double contact_ohms = 0.0;
  bool open = false;
  bool limited = false;
  bool locked = false;  // a tentative switch was undone; stays in requested mode
};

ContactState contact_for(const ContactMap& contacts, const PadId& id) {
  auto it = contacts.find(id);
  if (it == contacts.end()) return ContactState{0.0, 0, 0.0, 1e6};
  return it->second;
}

std::size_t pad_index(const UutModel& uut, const PadId& id) {
  for (std::size_t i = 0; i < uut.pads.size(); ++i)
    if (uut.pads[i].id == id) return i;
  throw Error(Errc::UnknownPad, "pad '" + id + "' is not on the UUT");
}

std::vector<ActiveDrive> prepare_drives(const UutModel& uut, const ContactMap& contacts,
                                        const Stimulus& stimulus) {
  std::vector<ActiveDrive> drives;
  for (const auto& [id, drive] : stimulus) {
    ActiveDrive d;
    d.pad_index = pad_index(uut, id);
    if (!std::isfinite(drive.level))
      throw Error(Errc::InvalidArgument, "stimulus level on '" + id + "' is not finite");
    if (std::isnan(drive.compliance) || !(drive.compliance > 0.0))
      throw Error(Errc::InvalidArgument, "compliance on '" + id + "' must be > 0");
    const ContactState c = contact_for(contacts, id);
    c.validate();
    d.requested = drive;
    d.effective = drive;
    d.open = c.open();
    d.contact_ohms = std::max(c.resistance, kMinContactOhms);
    drives.push_back(d);
  }
  return drives;
}

std::vector<detail::Injection> injections_for(const std::vector<ActiveDrive>& drives) {
  std::vector<detail::Injection> out;
  out.reserve(drives.size());
  for (const auto& d : drives) {
    out.push_back({static_cast<int>(d.pad_index), d.effective.mode, d.effective.level,
                   d.open ? 0.0 : 1.0 / d.contact_ohms});
  }
  return out;
}

struct Solved {
  DcSolution solution;
  Eigen::VectorXd x;
};

/// Newton solve plus the source compliance loop. A current source whose
/// terminal runs past its bound during the iteration is switched to a
/// voltage source at the bound (and vice versa); after convergence each
/// switch is re-checked, since on a passive network a binding bound always
/// delivers less than the requested level.
Solved solve_network(const UutModel& uut, detail::Network& net, std::vector<ActiveDrive> drives,
                     Eigen::VectorXd x, const SolverOptions& options) {
  auto exceeds = [](const ActiveDrive& d, double v) {
    if (d.effective.mode == DriveMode::Current) {
      return std::abs(v + d.effective.level * d.contact_ohms) > d.effective.compliance;
    }
    return std::abs((d.effective.level - v) / d.contact_ohms) > d.effective.compliance;
  };
  auto eligible = [](const ActiveDrive& d) { return !d.open && !d.limited && !d.locked; };

  // Only current-mode terminals can run away, so only they interrupt; a
  // voltage-mode current check is meaningless before the iterate converges.
  const auto interrupt = [&](const Eigen::VectorXd& xi) {
    for (const auto& d : drives) {
      if (!d.open && !d.locked && d.effective.mode == DriveMode::Current &&
          exceeds(d, xi[static_cast<Eigen::Index>(d.pad_index)]))
        return true;
    }
    return false;
  };

  detail::Network::Result result;
  int iterations = 0;
  bool settled = false;
  const std::size_t max_passes = 3 * drives.size() + 2;
  for (std::size_t pass = 0; pass < max_passes && !settled; ++pass) {
    net.set_injections(injections_for(drives));
    result = net.newton(std::move(x), options, interrupt);
    x = result.x;
    iterations += result.iterations;

    bool changed = false;
    for (auto& d : drives) {
      if (d.open || d.locked || d.effective.mode != DriveMode::Current) continue;
      const double v = x[static_cast<Eigen::Index>(d.pad_index)];
      if (!exceeds(d, v)) continue;
      if (d.limited) {
        // Was a voltage source pushed onto its current bound; the bound
        // cannot be binding if the terminal now overshoots the voltage.
        d.effective = d.requested;
        d.limited = false;
        d.locked = true;
      } else {
        const double probe = v + d.effective.level * d.contact_ohms;
        d.effective = {DriveMode::Voltage, std::copysign(d.requested.compliance, probe),
                       std::abs(d.requested.level)};
        d.limited = true;
      }
      changed = true;
    }
    if (changed || result.interrupted) continue;

    for (auto& d : drives) {
      if (!eligible(d) || d.effective.mode != DriveMode::Voltage) continue;
      const double v = x[static_cast<Eigen::Index>(d.pad_index)];
      if (!exceeds(d, v)) continue;
      const double amps = (d.effective.level - v) / d.contact_ohms;
      d.effective = {DriveMode::Current, std::copysign(d.requested.compliance, amps),
                     std::abs(d.requested.level)};
      d.limited = changed = true;
    }
    if (changed) continue;

    for (auto& d : drives) {
      if (!d.limited) continue;
      const double v = x[static_cast<Eigen::Index>(d.pad_index)];
      const double delivered = d.effective.mode == DriveMode::Voltage
                                   ? (d.effective.level - v) / d.contact_ohms
                                   : v + d.effective.level * d.contact_ohms;
      const double bound = std::abs(d.requested.level);
      if (std::abs(delivered) > bound * (1.0 + 1e-12) + 1e-15) {
        d.effective = d.requested;
        d.limited = false;
        d.locked = changed = true;
      }
    }
    settled = !changed;
  }
  if (!settled) {
    throw Error(Errc::NonConvergence, "source compliance switching did not settle",
                result.residual);
  }

  DcSolution sol;
  sol.residual = result.residual;
  sol.iterations = iterations;
  sol.vcc_volts = net.voltage(net.rail(Rail::Vcc), x);
  sol.gnd_volts = net.voltage(net.rail(Rail::Gnd), x);
  for (std::size_t i = 0; i < uut.pads.size(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    sol.pads[uut.pads[i].id] = PadResponse{v, v, 0.0, false};
  }
  for (const auto& d : drives) {
    PadResponse& r = sol.pads[uut.pads[d.pad_index].id];
    if (d.open) {
      // Nothing flows; a current source runs up to its compliance bound.
      if (d.requested.mode == DriveMode::Voltage) {
        r.probe_volts = d.requested.level;
      } else if (d.requested.level != 0.0) {
        r.probe_volts = std::copysign(d.requested.compliance, d.requested.level);
        r.limited = true;
      }
      continue;
    }
    r.limited = d.limited;
    if (d.effective.mode == DriveMode::Current) {
      r.amperes = d.effective.level;
      r.probe_volts = r.pad_volts + d.effective.level * d.contact_ohms;
    } else {
      r.probe_volts = d.effective.level;
      r.amperes = (d.effective.level - r.pad_volts) / d.contact_ohms;
    }
  }
  return {std::move(sol), std::move(x)};
}

}  // namespace

std::string_view to_string(DriveMode mode) {
  return mode == DriveMode::Current ? "current" : "voltage";
}

DriveMode parse_drive_mode(std::string_view text) {
  if (text == "current") return DriveMode::Current;
  if (text == "voltage") return DriveMode::Voltage;
  throw Error(Errc::InvalidArgument, "unknown drive mode '" + std::string(text) + "'");
}

DcSolution solve_dc(const UutModel& uut, const ContactMap& contacts, const Stimulus& stimulus,
                    const SolverOptions& options) {
  uut.validate();
  auto drives = prepare_drives(uut, contacts, stimulus);
  detail::Network net(uut);
  return solve_network(uut, net, std::move(drives), Eigen::VectorXd::Zero(net.size()), options)
      .solution;
}

double solve_rail_sense(const UutModel& uut, const ContactMap& contacts,
                        const std::map<PadId, double>& inject, Rail sense_rail,
                        double compliance, const SolverOptions& options) {
  uut.validate();
  bool routed = false;
  Stimulus stimulus;
  for (const auto& [id, amps] : inject) {
    const Pad* pad = uut.find(id);
    if (!pad) throw Error(Errc::UnknownPad, "pad '" + id + "' is not on the UUT");
    routed = routed || pad->circuit.connects_to(sense_rail);
    stimulus[id] = Drive{DriveMode::Current, amps, compliance};
  }
  if (!routed) {
    throw Error(Errc::NoPathToRail, "no injected pad reaches the " +
                                        std::string(to_string(sense_rail)) + " rail");
  }
  const DcSolution sol = solve_dc(uut, contacts, stimulus, options);
  return sol.rail_volts(sense_rail);
}

TransientState TransientState::at_rest(const UutModel& uut) {
  TransientState s;
  for (const auto& pad : uut.pads) s.cap_volts[pad.id] = 0.0;
  return s;
}

TransientState TransientState::from_dc(const UutModel& uut, const DcSolution& dc) {
  TransientState s;
  for (const auto& pad : uut.pads) {
    auto it = dc.pads.find(pad.id);
    s.cap_volts[pad.id] = it == dc.pads.end() ? 0.0 : it->second.pad_volts - dc.gnd_volts;
  }
  return s;
}

TransientStep step_transient(const UutModel& uut, const ContactMap& contacts,
                             const Stimulus& stimulus, const TransientState& state, double dt,
                             const SolverOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(Errc::InvalidArgument, "transient step needs dt > 0");
  uut.validate();
  auto drives = prepare_drives(uut, contacts, stimulus);
  detail::Network net(uut);

  std::vector<detail::Capacitor> caps;
  for (std::size_t i = 0; i < uut.pads.size(); ++i) {
    const double c = uut.pads[i].circuit.shunt_capacitance;
    if (c <= 0.0) continue;
    auto it = state.cap_volts.find(uut.pads[i].id);
    caps.push_back({static_cast<int>(i), net.rail(Rail::Gnd), c / dt,
                    it == state.cap_volts.end() ? 0.0 : it->second});
  }
  net.set_capacitors(std::move(caps));

  Eigen::VectorXd guess = Eigen::VectorXd::Zero(net.size());
  if (state.guess.size() == static_cast<std::size_t>(net.size()))
    guess = Eigen::Map<const Eigen::VectorXd>(state.guess.data(), net.size());

  Solved solved = solve_network(uut, net, std::move(drives), std::move(guess), options);

  TransientStep step;
  step.next = TransientState::from_dc(uut, solved.solution);
  step.next.guess.assign(solved.x.data(), solved.x.data() + solved.x.size());
  step.response = std::move(solved.solution);
  return step;
}

double powered_consumption(const UutModel& uut, double v_input) {
  if (!uut.powered || !uut.consumption)
    throw Error(Errc::NotPoweredModel, "UUT model has no powered consumption map");
  return uut.consumption->at(v_input);
}

}  // namespace vcit::sim
