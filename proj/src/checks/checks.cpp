#include "vcit/checks/checks.hpp"

#include <cmath>

#include "vcit/error.hpp"

namespace vcit::checks {

void VcitVerdict::add(CheckDetail d) {
  pass = pass && d.pass;
  details.push_back(std::move(d));
}

void VcitVerdict::merge(const VcitVerdict& other) {
  for (const auto& d : other.details) add(d);
  pass = pass && other.pass;
}

std::vector<std::string> VcitVerdict::failed_subjects() const {
  std::vector<std::string> out;
  for (const auto& d : details) {
    if (d.pass) continue;
    bool seen = false;
    for (const auto& s : out) seen = seen || s == d.subject;
    if (!seen) out.push_back(d.subject);
  }
  return out;
}

double steady_state(const std::vector<double>& samples) {
  if (samples.empty()) throw Error(Errc::InvalidArgument, "no samples to average");
  const std::size_t n = samples.size();
  const std::size_t tail = (n + 3) / 4;
  double sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) sum += samples[i];
  return sum / static_cast<double>(tail);
}

VcitVerdict single_level_test(const prober::CaptureRecord& capture, double lo, double hi) {
  if (!(lo <= hi)) throw Error(Errc::InvalidArgument, "window needs lo <= hi");
  const double v = steady_state(capture.measured_voltage);
  CheckDetail d;
  d.check = "single";
  d.subject = capture.pad;
  d.values = {v};
  d.pass = lo <= v && v <= hi;
  if (capture.protection_tripped) d.note = "protection tripped";
  VcitVerdict out;
  out.add(std::move(d));
  return out;
}

VcitVerdict differential_test(const std::vector<prober::CaptureRecord>& captures,
                              const std::vector<DeltaWindow>& windows) {
  if (captures.size() < 2)
    throw Error(Errc::InvalidArgument, "differential test needs at least two captures");
  if (windows.size() != captures.size() - 1)
    throw Error(Errc::InvalidArgument, "differential test needs one window per level step");
  std::vector<double> levels, readings;
  for (const auto& c : captures) {
    if (c.pad != captures.front().pad)
      throw Error(Errc::InvalidArgument, "differential captures must share one pad");
    levels.push_back(steady_state(c.applied));
    readings.push_back(steady_state(c.measured_voltage));
  }
  for (std::size_t a = 0; a < levels.size(); ++a)
    for (std::size_t b = a + 1; b < levels.size(); ++b)
      if (levels[a] == levels[b])
        throw Error(Errc::DegenerateLevels, "captures " + std::to_string(a) + " and " +
                                                std::to_string(b) + " share one level");
  CheckDetail d;
  d.check = "diff";
  d.subject = captures.front().pad;
  for (std::size_t k = 0; k + 1 < readings.size(); ++k) {
    const double delta = readings[k + 1] - readings[k];
    d.values.push_back(delta);
    if (!(windows[k].lo <= delta && delta <= windows[k].hi)) d.violated.push_back(k);
  }
  d.pass = d.violated.empty();
  VcitVerdict out;
  out.add(std::move(d));
  return out;
}

VcitVerdict shape_test(const MeasurementVector& x, const HalfSpaceRegion& region) {
  x.validate();
  CheckDetail d;
  d.check = "shape";
  d.values = region.project(x.values);
  for (std::size_t j = 0; j < d.values.size(); ++j)
    if (!(d.values[j] <= region.distance(j))) d.violated.push_back(j);
  d.pass = d.violated.empty();
  VcitVerdict out;
  out.add(std::move(d));
  return out;
}

std::string classify_signature(const MeasurementVector& x, const SignatureCatalog& catalog) {
  x.validate();
  if (catalog.empty()) throw Error(Errc::InvalidArgument, "signature catalog is empty");
  for (const auto& [tag, region] : catalog)
    if (region.dimension() != x.size())
      throw Error(Errc::DimensionMismatch, "catalog region '" + tag + "' has dimension " +
                                               std::to_string(region.dimension()));
  for (const auto& [tag, region] : catalog)
    if (region.contains(x.values)) return tag;
  return "unclassified";
}

}  // namespace vcit::checks
