#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vcit/sim/diode.hpp"

namespace vcit::sim {

using PadId = std::string;

enum class Rail { Vcc, Gnd };
enum class Polarity { Forward, Reverse };  // Forward: anode on the pad

std::string_view to_string(Rail rail);
Rail parse_rail(std::string_view text);

// ---------------------------------------------------------------------------
// Pad circuitry. Every pad is a star branch from the pad node to the rails.
// ---------------------------------------------------------------------------

/// ESD clamp pair: pad -> VCC (anode on pad) and GND -> pad (anode on GND).
struct EsdPair {
  DiodeModel to_vcc;
  DiodeModel to_gnd;
};

struct SeriesDiode {
  DiodeModel diode;
  Polarity polarity = Polarity::Forward;
  Rail rail = Rail::Gnd;
};

/// Light emitting diode from the pad to GND; the color is what a signature
/// catalog is expected to recover.
struct Led {
  DiodeModel diode;
  std::string color;
};

struct Resistive {
  double ohms = 1e3;
  Rail rail = Rail::Gnd;
};

struct OpenPad {};

using PadKind = std::variant<EsdPair, SeriesDiode, Led, Resistive, OpenPad>;

struct PadCircuit {
  PadKind kind = OpenPad{};
  double shunt_capacitance = 0.0;  // F, pad to GND rail

  void validate() const;
  bool connects_to(Rail rail) const;
};

struct Pad {
  PadId id;
  PadCircuit circuit;
};

// ---------------------------------------------------------------------------
// Rails
// ---------------------------------------------------------------------------

struct Grounded {};
struct Biased {
  double volts = 0.0;
};
/// Emulated supply with its output off, as seen on its sense terminals: an
/// active down-programming sink that holds the output near zero until its
/// current capability is exhausted, in parallel with a bleeder.
///   I(V) = sink_limit * tanh(V / sink_knee) + V / bleed_ohms
struct Sensed {
  double sink_limit = 12e-3;
  double sink_knee = 2e-3;
  double bleed_ohms = 100.0;
};
struct Floating {};

using RailState = std::variant<Grounded, Biased, Sensed, Floating>;

/// Piecewise-linear supply current as a function of input pad voltage.
class ConsumptionCurve {
 public:
  ConsumptionCurve() = default;
  /// Knots as (volts, amperes); volts strictly increasing, amperes nondecreasing.
  explicit ConsumptionCurve(std::vector<std::pair<double, double>> knots);

  /// Linear interpolation, clamped to the end knots.
  double at(double volts) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

struct UutModel {
  std::vector<Pad> pads;
  RailState vcc = Floating{};
  RailState gnd = Grounded{};
  bool powered = false;
  double supply_volts = 0.0;  // VCC bias applied while powered
  std::optional<ConsumptionCurve> consumption;

  void validate() const;
  const Pad* find(const PadId& id) const;
  Pad* find(const PadId& id);
  bool has_capacitance() const;

  /// Rail state the solver actually uses (powered mode biases VCC).
  RailState effective_rail(Rail rail) const;
};

// ---------------------------------------------------------------------------
// Needle contacts
// ---------------------------------------------------------------------------

struct ContactState {
  double resistance = 0.1;  // ohm, +inf for a lifted needle
  std::uint64_t cycles = 0;
  double wear_rate = 0.0;  // ohm per cycle
  double open_threshold = 1e6;

  bool open() const { return resistance >= open_threshold; }
  void validate() const;
};

using ContactMap = std::map<PadId, ContactState>;

/// Linear wear law: resistance grows by wear_rate per probing cycle.
ContactState wear_step(const ContactState& contact, std::uint64_t cycles);

struct Bench {
  UutModel uut;
  ContactMap contacts;
};

}  // namespace vcit::sim
