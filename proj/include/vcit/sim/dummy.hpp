#pragma once

#include <vector>

#include "vcit/sim/solver.hpp"

namespace vcit::sim {

/// Expected reading of one dummy pad: the pad voltage under a fixed drive.
struct DummySignature {
  PadId pad;
  DriveMode mode = DriveMode::Voltage;
  double level = 1.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Reference board mounted in place of the product to validate the needles.
struct DummyUutSpec {
  UutModel model;
  std::vector<DummySignature> signatures;

  /// Rejects empty specs, unknown pads, empty bands, and bands that do not
  /// contain the signature the reference circuit produces through an ideal
  /// needle.
  void validate() const;

  /// Pad voltage each signature yields through the given contacts.
  double nominal_reading(const DummySignature& sig, const ContactMap& contacts) const;
};

}  // namespace vcit::sim
