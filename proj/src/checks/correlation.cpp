#include <algorithm>
#include <cmath>

#include "vcit/checks/checks.hpp"
#include "vcit/error.hpp"

namespace vcit::checks {

namespace {

// Centered and scaled to unit length; empty when the signal is constant.
std::vector<double> unit_centered(const std::vector<double>& x) {
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return {};
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> u(x.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = x[i] - mean;
    ss += u[i] * u[i];
  }
  if (!(ss > 0.0)) return {};
  const double len = std::sqrt(ss);
  for (auto& v : u) v /= len;
  return u;
}

}  // namespace

void CorrelationRef::validate() const {
  if (reference.size() < 2)
    throw Error(Errc::InvalidArgument, "correlation reference needs at least two samples");
  for (double v : reference)
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "reference sample is not finite");
  if (unit_centered(reference).empty())
    throw Error(Errc::InvalidArgument, "correlation reference is constant");
  if (!(threshold >= -1.0 && threshold <= 1.0))
    throw Error(Errc::InvalidArgument, "correlation threshold must lie in [-1, 1]");
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "reference dt must be > 0");
}

double correlation_score(const std::vector<double>& acquired, const CorrelationRef& ref) {
  if (acquired.size() != ref.reference.size())
    throw Error(Errc::LengthMismatch, "acquired has " + std::to_string(acquired.size()) +
                                          " samples, reference " +
                                          std::to_string(ref.reference.size()));
  ref.validate();
  const auto u = unit_centered(acquired);
  if (u.empty()) return 0.0;
  const auto v = unit_centered(ref.reference);
  // For unit vectors u.v = 1 - |u-v|^2/2 = |u+v|^2/2 - 1. Taking the form
  // whose squared term is small keeps exact copies at exactly +-1.
  double dot = 0.0, diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    diff += (u[i] - v[i]) * (u[i] - v[i]);
    sum += (u[i] + v[i]) * (u[i] + v[i]);
  }
  const double r = dot >= 0.0 ? 1.0 - 0.5 * diff : 0.5 * sum - 1.0;
  return std::clamp(r, -1.0, 1.0);
}

VcitVerdict correlation_test(prober::ProberPort& port, const sim::UutModel& uut,
                             const prober::StimulusWaveform& wf, const CorrelationRef& ref,
                             const prober::ProtectionLimits& limits) {
  if (!uut.powered || !uut.consumption)
    throw Error(Errc::NotPoweredModel, "correlation test needs a powered UUT model");
  if (wf.mode != sim::DriveMode::Voltage || wf.target_pads.size() != 1)
    throw Error(Errc::InvalidArgument, "correlation stimulus must be a one-pad voltage waveform");
  const auto caps = port.run(wf, limits);
  const auto& cap = caps.at(0);
  std::vector<double> supply(cap.sample_count());
  for (std::size_t i = 0; i < supply.size(); ++i)
    supply[i] = sim::powered_consumption(uut, cap.measured_voltage[i]);

  CheckDetail d;
  d.check = "corr";
  d.subject = cap.pad;
  d.score = correlation_score(supply, ref);
  d.values = {*d.score, ref.threshold};
  d.pass = *d.score >= ref.threshold;
  VcitVerdict out;
  out.add(std::move(d));
  return out;
}

VcitVerdict correlation_test(const sim::Bench& bench, const prober::StimulusWaveform& wf,
                             const CorrelationRef& ref, const prober::ProtectionLimits& limits) {
  prober::LocalProber port(bench);
  return correlation_test(port, bench.uut, wf, ref, limits);
}

}  // namespace vcit::checks
