#include "vcit/prober/prober.hpp"

#include <algorithm>
#include <cmath>

#include "vcit/error.hpp"

namespace vcit::prober {

void ProtectionLimits::validate() const {
  if (!(max_abs_voltage > 0.0) || !(max_abs_current > 0.0))
    throw Error(Errc::InvalidArgument, "protection limits must be > 0");
}

namespace {

// Clamp into [-limit, limit]; reports whether the value moved.
bool clamp_to(double& value, double limit) {
  const double c = std::clamp(value, -limit, limit);
  const bool moved = c != value;
  value = c;
  return moved;
}

}  // namespace

std::vector<CaptureRecord> execute(const StimulusWaveform& wf, const ProtectionLimits& limits,
                                   const sim::Bench& bench, const Perturbation& perturb) {
  wf.validate();
  limits.validate();
  for (const auto& pad : wf.target_pads)
    if (!bench.uut.find(pad))
      throw Error(Errc::UnknownPad, "pad '" + pad + "' is not on the UUT");

  const bool current_mode = wf.mode == sim::DriveMode::Current;
  const double level_limit = current_mode ? limits.max_abs_current : limits.max_abs_voltage;
  const double compliance = current_mode ? limits.max_abs_voltage : limits.max_abs_current;

  std::vector<CaptureRecord> records(wf.target_pads.size());
  for (std::size_t p = 0; p < records.size(); ++p) {
    auto& r = records[p];
    r.pad = wf.target_pads[p];
    r.dt = wf.dt;
    r.applied.reserve(wf.samples.size());
    r.source_voltage.reserve(wf.samples.size());
    r.measured_voltage.reserve(wf.samples.size());
    r.measured_current.reserve(wf.samples.size());
  }

  const bool transient = bench.uut.has_capacitance();
  auto state = sim::TransientState::at_rest(bench.uut);

  for (std::size_t i = 0; i < wf.samples.size(); ++i) {
    double level = wf.samples[i];
    const bool source_clamped = clamp_to(level, level_limit);

    sim::Stimulus stim;
    for (const auto& pad : wf.target_pads) stim[pad] = sim::Drive{wf.mode, level, compliance};

    sim::DcSolution sol;
    if (transient) {
      auto step = sim::step_transient(bench.uut, bench.contacts, stim, state, wf.dt);
      state = std::move(step.next);
      sol = std::move(step.response);
    } else {
      sol = sim::solve_dc(bench.uut, bench.contacts, stim);
    }

    for (auto& r : records) {
      const auto& resp = sol.pads.at(r.pad);
      double v = resp.pad_volts;
      if (perturb) v += perturb(r.pad, i, v);
      double a = resp.amperes;
      double src = resp.probe_volts;
      bool tripped = source_clamped || resp.limited;
      tripped |= clamp_to(v, limits.max_abs_voltage);
      tripped |= clamp_to(a, limits.max_abs_current);
      clamp_to(src, limits.max_abs_voltage);

      r.applied.push_back(level);
      r.source_voltage.push_back(src);
      r.measured_voltage.push_back(v);
      r.measured_current.push_back(a);
      if (tripped && !r.protection_tripped) {
        r.protection_tripped = true;
        r.trip_index = i;
      }
    }
  }
  return records;
}

double measure_charge(const CaptureRecord& capture) {
  if (capture.measured_current.empty())
    throw Error(Errc::InvalidArgument, "capture has no samples");
  double sum = 0.0;
  for (double a : capture.measured_current) sum += a;
  return capture.dt * sum;
}

}  // namespace vcit::prober
