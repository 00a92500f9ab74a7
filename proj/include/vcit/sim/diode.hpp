#pragma once

namespace vcit::sim {

/// Shockley junction with an optional series resistance:
///   I = Is * (exp(Vj / (n * Vt)) - 1),   V = Vj + I * Rs
///
/// Above 80 emission voltages the exponential is continued linearly so the
/// law stays finite, strictly increasing and C1 for any terminal voltage.
/// At that point even a 1e-29 A junction carries ~1e6 A, far outside any
/// fixture we model.
struct DiodeModel {
  double saturation_current = 1e-14;  // A
  double ideality = 1.0;
  double thermal_voltage = 0.02585;   // V
  double series_resistance = 0.0;     // ohm

  void validate() const;

  double emission_voltage() const { return ideality * thermal_voltage; }

  struct Eval {
    double current;
    double conductance;  // dI/dV at the terminals
  };

  double junction_current(double vj) const;
  double junction_conductance(double vj) const;
  /// Junction share of a terminal voltage (solves Vj + Rs*I(Vj) = v).
  double junction_voltage(double v) const;

  Eval evaluate(double v) const;
  double current(double v) const { return evaluate(v).current; }
  double conductance(double v) const { return evaluate(v).conductance; }

  /// Closed-form inverse of the terminal law; requires amperes > -Is.
  double forward_voltage(double amperes) const;

  /// Voltage where the junction curve bends; used by the Newton limiter.
  double critical_voltage() const;
};

}  // namespace vcit::sim
