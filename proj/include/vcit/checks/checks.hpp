#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcit/checks/region.hpp"
#include "vcit/prober/prober.hpp"

namespace vcit::checks {

struct CheckDetail {
  std::string check;    // single | diff | corr | shape | classify | rail_sense | dummy
  std::string subject;  // pad id or vector name
  bool pass = false;
  std::vector<double> values;          // readings, deltas or projections
  std::vector<std::size_t> violated;   // shape: failing faces; diff: failing deltas
  std::optional<double> score;         // correlation
  std::string note;
};

struct VcitVerdict {
  bool pass = true;
  std::vector<CheckDetail> details;

  void add(CheckDetail d);
  void merge(const VcitVerdict& other);
  std::vector<std::string> failed_subjects() const;
};

/// Mean of the last ceil(n/4) samples.
double steady_state(const std::vector<double>& samples);

VcitVerdict single_level_test(const prober::CaptureRecord& capture, double lo, double hi);

/// Closed window on a level difference.
struct DeltaWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Captures in application order; windows[k] bounds step k -> k+1 of the
/// steady-state readings.
VcitVerdict differential_test(const std::vector<prober::CaptureRecord>& captures,
                              const std::vector<DeltaWindow>& windows);

struct CorrelationRef {
  std::vector<double> reference;
  double dt = 1e-3;
  double threshold = 0.9;

  void validate() const;
};

/// Pearson correlation in [-1, 1]; 0 for a constant acquired signal.
double correlation_score(const std::vector<double>& acquired, const CorrelationRef& ref);

/// Drives the input pad of a powered UUT and correlates the resulting supply
/// current trace with the reference.
VcitVerdict correlation_test(prober::ProberPort& port, const sim::UutModel& uut,
                             const prober::StimulusWaveform& wf, const CorrelationRef& ref,
                             const prober::ProtectionLimits& limits = {});
VcitVerdict correlation_test(const sim::Bench& bench, const prober::StimulusWaveform& wf,
                             const CorrelationRef& ref,
                             const prober::ProtectionLimits& limits = {});

VcitVerdict shape_test(const MeasurementVector& x, const HalfSpaceRegion& region);

using SignatureCatalog = std::vector<std::pair<std::string, HalfSpaceRegion>>;

/// Tag of the first region containing x, or "unclassified".
std::string classify_signature(const MeasurementVector& x, const SignatureCatalog& catalog);

}  // namespace vcit::checks
