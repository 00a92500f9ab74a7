#include "vcit/prober/waveform.hpp"

#include <cmath>
#include <set>

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::prober {

void StimulusWaveform::validate() const {
  if (samples.empty()) throw Error(Errc::InvalidArgument, "waveform has no samples");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(Errc::InvalidArgument, "waveform dt must be > 0");
  if (target_pads.empty()) throw Error(Errc::InvalidArgument, "waveform has no target pads");
  std::set<sim::PadId> seen;
  for (const auto& pad : target_pads) {
    if (!text::is_identifier(pad))
      throw Error(Errc::InvalidArgument, "bad pad name '" + pad + "'");
    if (!seen.insert(pad).second)
      throw Error(Errc::InvalidArgument, "pad '" + pad + "' targeted twice");
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i]))
      throw Error(Errc::InvalidArgument, "sample " + std::to_string(i) + " is not finite");
}

StimulusWaveform parse_waveform(std::string_view body) {
  StimulusWaveform wf;
  bool have_header = false;
  for (const auto& raw : text::split_lines(body)) {
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto tok = text::split_ws(line);
    if (!have_header) {
      if (tok.size() < 3)
        throw Error(Errc::InvalidArgument, "waveform header needs: mode dt pad...");
      wf.mode = sim::parse_drive_mode(tok[0]);
      wf.dt = text::parse_double(tok[1]);
      for (std::size_t i = 2; i < tok.size(); ++i) wf.target_pads.emplace_back(tok[i]);
      have_header = true;
      continue;
    }
    if (tok.size() != 1)
      throw Error(Errc::InvalidArgument, "waveform sample line must hold one level");
    wf.samples.push_back(text::parse_double(tok[0]));
  }
  if (!have_header) throw Error(Errc::InvalidArgument, "waveform is empty");
  wf.validate();
  return wf;
}

std::string format_waveform_header(const StimulusWaveform& wf) {
  std::string out(sim::to_string(wf.mode));
  out += ' ';
  out += text::format_double(wf.dt);
  for (const auto& pad : wf.target_pads) {
    out += ' ';
    out += pad;
  }
  return out;
}

std::string format_waveform(const StimulusWaveform& wf) {
  std::string out = format_waveform_header(wf);
  out += '\n';
  for (double s : wf.samples) {
    out += text::format_double(s);
    out += '\n';
  }
  return out;
}

}  // namespace vcit::prober
