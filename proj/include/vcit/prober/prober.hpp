#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcit/prober/waveform.hpp"

namespace vcit::prober {

struct ProtectionLimits {
  double max_abs_voltage = 5.0;   // V
  double max_abs_current = 50e-3; // A

  void validate() const;
};

/// One pad's synchronized record. Index i of every series is the same
/// instant.
struct CaptureRecord {
  sim::PadId pad;
  double dt = 0.0;
  std::vector<double> applied;           // commanded level after clamping
  std::vector<double> source_voltage;    // at the source terminal
  std::vector<double> measured_voltage;  // Kelvin sense on the UUT pad
  std::vector<double> measured_current;  // through the needle into the pad
  bool protection_tripped = false;
  std::optional<std::size_t> trip_index;

  std::size_t sample_count() const { return applied.size(); }
};

/// Additive meter offset: (pad, sample index, reading) -> volts to add.
using Perturbation = std::function<double(const sim::PadId&, std::size_t, double)>;

std::vector<CaptureRecord> execute(const StimulusWaveform& wf, const ProtectionLimits& limits,
                                   const sim::Bench& bench, const Perturbation& perturb = {});

/// Sample-and-hold integral of measured_current: dt * sum(i).
double measure_charge(const CaptureRecord& capture);

// Line format, one block per record:
//   capture <pad> <dt> <count> <tripped 0|1> <trip_index|->
//   <applied> <source_v> <measured_v> <measured_i>    (count lines)
std::string serialize_captures(const std::vector<CaptureRecord>& captures);
std::vector<CaptureRecord> parse_captures(std::string_view text);

/// Anything that can run a waveform: the in-process instrument or a remote
/// one on the bus.
class ProberPort {
 public:
  virtual ~ProberPort() = default;
  virtual std::vector<CaptureRecord> run(const StimulusWaveform& wf,
                                         const ProtectionLimits& limits) = 0;
};

class LocalProber : public ProberPort {
 public:
  explicit LocalProber(const sim::Bench& bench, Perturbation perturb = {})
      : bench_(&bench), perturb_(std::move(perturb)) {}

  std::vector<CaptureRecord> run(const StimulusWaveform& wf,
                                 const ProtectionLimits& limits) override {
    return execute(wf, limits, *bench_, perturb_);
  }

 private:
  const sim::Bench* bench_;
  Perturbation perturb_;
};

}  // namespace vcit::prober
