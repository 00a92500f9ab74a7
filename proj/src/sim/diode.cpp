#include "vcit/sim/diode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vcit/error.hpp"

namespace vcit::sim {

namespace {
constexpr double kMaxExponent = 80.0;
}

void DiodeModel::validate() const {
  if (!(saturation_current > 0.0) || !std::isfinite(saturation_current))
    throw Error(Errc::InvalidArgument, "diode saturation current must be > 0");
  if (!(ideality >= 1.0) || !std::isfinite(ideality))
    throw Error(Errc::InvalidArgument, "diode ideality must be >= 1");
  if (!(thermal_voltage > 0.0) || !std::isfinite(thermal_voltage))
    throw Error(Errc::InvalidArgument, "diode thermal voltage must be > 0");
  if (!(series_resistance >= 0.0) || !std::isfinite(series_resistance))
    throw Error(Errc::InvalidArgument, "diode series resistance must be >= 0");
}

double DiodeModel::junction_current(double vj) const {
  const double u = vj / emission_voltage();
  if (u > kMaxExponent) {
    const double e = std::exp(kMaxExponent);
    return saturation_current * (e * (1.0 + (u - kMaxExponent)) - 1.0);
  }
  return saturation_current * std::expm1(u);
}

double DiodeModel::junction_conductance(double vj) const {
  const double u = std::min(vj / emission_voltage(), kMaxExponent);
  return saturation_current * std::exp(u) / emission_voltage();
}

double DiodeModel::junction_voltage(double v) const {
  if (series_resistance == 0.0) return v;
  // g(vj) = vj + Rs*I(vj) - v is convex and increasing, so Newton started to
  // the right of the root walks down to it without overshooting.
  double vj = 0.0;
  if (v > 0.0) {
    vj = std::min(v, emission_voltage() * std::log1p(v / (series_resistance * saturation_current)));
  }
  for (int i = 0; i < 200; ++i) {
    const double g = vj + series_resistance * junction_current(vj) - v;
    const double dg = 1.0 + series_resistance * junction_conductance(vj);
    const double next = vj - g / dg;
    if (!(next < vj)) break;
    const double step = vj - next;
    vj = next;
    if (step <= 1e-15 * std::max(1.0, std::abs(vj))) break;
  }
  return vj;
}

DiodeModel::Eval DiodeModel::evaluate(double v) const {
  const double vj = junction_voltage(v);
  const double gj = junction_conductance(vj);
  return {junction_current(vj), gj / (1.0 + series_resistance * gj)};
}

double DiodeModel::forward_voltage(double amperes) const {
  if (!(amperes > -saturation_current))
    throw Error(Errc::InvalidArgument, "diode current below -Is has no inverse");
  double u = std::log1p(amperes / saturation_current);
  if (u > kMaxExponent) {
    u = kMaxExponent + ((amperes / saturation_current + 1.0) / std::exp(kMaxExponent) - 1.0);
  }
  return u * emission_voltage() + amperes * series_resistance;
}

double DiodeModel::critical_voltage() const {
  const double nvt = emission_voltage();
  return nvt * std::log(nvt / (std::sqrt(2.0) * saturation_current));
}

}  // namespace vcit::sim
