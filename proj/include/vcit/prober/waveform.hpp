#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vcit/sim/solver.hpp"

namespace vcit::prober {

/// Sampled source program. Every target pad receives the same level at the
/// same sample index.
struct StimulusWaveform {
  sim::DriveMode mode = sim::DriveMode::Current;
  std::vector<double> samples;
  double dt = 1e-3;  // s per sample
  std::vector<sim::PadId> target_pads;

  void validate() const;
};

// Text form:
//   <current|voltage> <dt> <pad> [<pad>...]
//   <level>
//   ...
// Blank lines and lines starting with '#' are skipped on input.
StimulusWaveform parse_waveform(std::string_view text);
std::string format_waveform(const StimulusWaveform& wf);

// Header line alone, used by the bus framing.
std::string format_waveform_header(const StimulusWaveform& wf);

}  // namespace vcit::prober
