#include "vcit/exec/plan.hpp"

#include <cmath>
#include <numbers>

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::exec {

std::string_view to_string(CheckKind kind) {
  switch (kind) {
    case CheckKind::Single: return "single";
    case CheckKind::Diff: return "diff";
    case CheckKind::Shape: return "shape";
    case CheckKind::Classify: return "classify";
    case CheckKind::Corr: return "corr";
    case CheckKind::RailSense: return "rail_sense";
  }
  return "?";
}

CheckKind parse_check_kind(std::string_view text) {
  for (auto k : {CheckKind::Single, CheckKind::Diff, CheckKind::Shape, CheckKind::Classify,
                 CheckKind::Corr, CheckKind::RailSense})
    if (to_string(k) == text) return k;
  throw Error(Errc::Config, "unknown check type '" + std::string(text) + "'");
}

std::string CheckSpec::describe() const {
  std::string out(to_string(kind));
  for (const auto& p : pads) out += ' ' + p;
  if (kind == CheckKind::RailSense) return out;
  out += ' ';
  out += sim::to_string(mode);
  for (double l : levels) out += ' ' + text::format_double(l);
  return out;
}

std::set<sim::PadId> check_pads(const CheckSpec& spec, const RailSenseConfig* rail_sense) {
  std::set<sim::PadId> out(spec.pads.begin(), spec.pads.end());
  if (spec.kind == CheckKind::RailSense && rail_sense)
    for (const auto& [pad, amps] : rail_sense->inject) out.insert(pad);
  return out;
}

std::set<sim::PadId> implicated_pads(const CheckSpec& spec, const checks::VcitVerdict& verdict,
                                     const RailSenseConfig* rail_sense) {
  const auto touched = check_pads(spec, rail_sense);
  std::set<sim::PadId> out;
  bool unnamed = false;
  for (const auto& d : verdict.details) {
    if (d.pass) continue;
    if (touched.count(d.subject))
      out.insert(d.subject);
    else
      unnamed = true;
  }
  if (unnamed) out.insert(touched.begin(), touched.end());
  return out;
}

std::vector<CheckSpec> restrict_to(const std::vector<CheckSpec>& battery,
                                   const std::set<sim::PadId>& pads,
                                   const RailSenseConfig* rail_sense) {
  std::vector<CheckSpec> out;
  for (const auto& spec : battery) {
    const auto touched = check_pads(spec, rail_sense);
    bool hit = false;
    for (const auto& p : touched) hit = hit || pads.count(p) > 0;
    if (!hit) continue;
    CheckSpec narrowed = spec;
    // Per-pad checks shrink to the pads asked about; vector checks stay whole.
    if (spec.kind == CheckKind::Single || spec.kind == CheckKind::Diff) {
      narrowed.pads.clear();
      for (const auto& p : spec.pads)
        if (pads.count(p)) narrowed.pads.push_back(p);
    }
    out.push_back(std::move(narrowed));
  }
  return out;
}

namespace {

// One capture set per level, all pads driven together.
std::vector<std::vector<prober::CaptureRecord>> capture_levels(const CheckSpec& spec,
                                                               const CheckContext& ctx) {
  std::vector<std::vector<prober::CaptureRecord>> out;
  for (double level : spec.levels) {
    prober::StimulusWaveform wf{spec.mode, std::vector<double>(spec.samples, level), spec.dt,
                                spec.pads};
    out.push_back(ctx.port->run(wf, ctx.limits));
  }
  return out;
}

const prober::CaptureRecord& capture_for(const std::vector<prober::CaptureRecord>& caps,
                                         const sim::PadId& pad) {
  for (const auto& c : caps)
    if (c.pad == pad) return c;
  throw Error(Errc::Protocol, "prober returned no capture for '" + pad + "'");
}

checks::VcitVerdict rail_sense_check(const CheckContext& ctx) {
  if (!ctx.rail_sense) throw Error(Errc::Config, "fixture has no rail_sense section");
  const auto& rs = *ctx.rail_sense;
  double v = sim::solve_rail_sense(ctx.bench->uut, ctx.bench->contacts, rs.inject, rs.rail,
                                   ctx.limits.max_abs_voltage);
  const std::string subject(sim::to_string(rs.rail));
  if (ctx.perturb) v += ctx.perturb(subject, 0, v);
  checks::CheckDetail d;
  d.check = "rail_sense";
  d.subject = subject;
  d.values = {v};
  d.pass = rs.band.lo <= v && v <= rs.band.hi;
  checks::VcitVerdict out;
  out.add(std::move(d));
  return out;
}

checks::VcitVerdict corr_check(const CheckSpec& spec, const CheckContext& ctx) {
  sim::Bench powered = *ctx.bench;
  powered.uut.powered = true;
  prober::StimulusWaveform wf{sim::DriveMode::Voltage, {}, spec.dt, spec.pads};
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const double ph = 2.0 * std::numbers::pi * static_cast<double>(i) /
                      static_cast<double>(spec.samples);
    wf.samples.push_back(spec.offset + spec.amplitude * std::sin(ph));
  }
  checks::CorrelationRef ref{wf.samples, spec.dt, spec.threshold};
  prober::LocalProber port(powered, ctx.perturb);
  return checks::correlation_test(port, powered.uut, wf, ref, ctx.limits);
}

}  // namespace

checks::VcitVerdict run_check(const CheckSpec& spec, const CheckContext& ctx) {
  if (spec.kind == CheckKind::RailSense) return rail_sense_check(ctx);
  if (spec.kind == CheckKind::Corr) return corr_check(spec, ctx);

  const auto levels = capture_levels(spec, ctx);
  checks::VcitVerdict out;
  switch (spec.kind) {
    case CheckKind::Single:
      for (const auto& c : levels.at(0))
        out.merge(checks::single_level_test(c, spec.windows.at(0).lo, spec.windows.at(0).hi));
      break;
    case CheckKind::Diff: {
      std::vector<checks::DeltaWindow> w;
      for (const auto& x : spec.windows) w.push_back({x.lo, x.hi});
      for (const auto& pad : spec.pads) {
        std::vector<prober::CaptureRecord> series;
        for (const auto& caps : levels) series.push_back(capture_for(caps, pad));
        out.merge(checks::differential_test(series, w));
      }
      break;
    }
    case CheckKind::Shape:
    case CheckKind::Classify: {
      checks::MeasurementVector x;
      for (const auto& pad : spec.pads) {
        for (std::size_t k = 0; k < levels.size(); ++k) {
          x.values.push_back(checks::steady_state(capture_for(levels[k], pad).measured_voltage));
          x.labels.push_back(pad + "@" + text::format_double(spec.levels[k]));
        }
      }
      std::string subject = spec.pads.front();
      for (std::size_t i = 1; i < spec.pads.size(); ++i) subject += "+" + spec.pads[i];
      if (spec.kind == CheckKind::Shape) {
        auto v = checks::shape_test(x, *spec.region);
        v.details.front().subject = subject;
        out.merge(v);
      } else {
        if (!ctx.catalog) throw Error(Errc::Config, "classify check needs a catalog");
        checks::CheckDetail d;
        d.check = "classify";
        d.subject = subject;
        d.values = x.values;
        d.note = checks::classify_signature(x, *ctx.catalog);
        d.pass = d.note == spec.expect;
        out.add(std::move(d));
      }
      break;
    }
    default:
      break;
  }
  return out;
}

checks::VcitVerdict run_battery(const std::vector<CheckSpec>& battery, const CheckContext& ctx) {
  checks::VcitVerdict out;
  for (const auto& spec : battery) out.merge(run_check(spec, ctx));
  return out;
}

}  // namespace vcit::exec
