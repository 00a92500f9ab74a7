#include "vcit/sim/dummy.hpp"

#include <cmath>
#include <set>

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::sim {

void DummyUutSpec::validate() const {
  model.validate();
  if (model.pads.empty() || signatures.empty())
    throw Error(Errc::Config, "dummy UUT must define at least one pad signature");
  std::set<PadId> seen;
  for (const auto& sig : signatures) {
    if (!model.find(sig.pad))
      throw Error(Errc::Config, "dummy signature names unknown pad '" + sig.pad + "'");
    if (!seen.insert(sig.pad).second)
      throw Error(Errc::Config, "dummy pad '" + sig.pad + "' has two signatures");
    if (!std::isfinite(sig.level) || !std::isfinite(sig.lo) || !std::isfinite(sig.hi) ||
        sig.lo > sig.hi)
      throw Error(Errc::Config, "dummy band for '" + sig.pad + "' is empty or not finite");
    const double nominal = nominal_reading(sig, {});
    if (nominal < sig.lo || nominal > sig.hi) {
      throw Error(Errc::Config, "dummy band for '" + sig.pad + "' [" + text::format_double(sig.lo) +
                                   ", " + text::format_double(sig.hi) +
                                   "] excludes its reference reading " +
                                   text::format_double(nominal));
    }
  }
}

double DummyUutSpec::nominal_reading(const DummySignature& sig, const ContactMap& contacts) const {
  Stimulus stimulus{{sig.pad, Drive{sig.mode, sig.level}}};
  return solve_dc(model, contacts, stimulus).pads.at(sig.pad).pad_volts;
}

}  // namespace vcit::sim
