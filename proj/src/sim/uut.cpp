#include "vcit/sim/uut.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vcit/error.hpp"
#include "vcit/text.hpp"

namespace vcit::sim {

std::string_view to_string(Rail rail) { return rail == Rail::Vcc ? "vcc" : "gnd"; }

Rail parse_rail(std::string_view text) {
  if (text == "vcc" || text == "VCC") return Rail::Vcc;
  if (text == "gnd" || text == "GND") return Rail::Gnd;
  throw Error(Errc::InvalidArgument, "unknown rail '" + std::string(text) + "'");
}

void PadCircuit::validate() const {
  if (!(shunt_capacitance >= 0.0) || !std::isfinite(shunt_capacitance))
    throw Error(Errc::InvalidArgument, "pad capacitance must be finite and >= 0");
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, EsdPair>) {
          k.to_vcc.validate();
          k.to_gnd.validate();
        } else if constexpr (std::is_same_v<T, SeriesDiode> || std::is_same_v<T, Led>) {
          k.diode.validate();
        } else if constexpr (std::is_same_v<T, Resistive>) {
          if (!(k.ohms > 0.0) || !std::isfinite(k.ohms))
            throw Error(Errc::InvalidArgument, "pad resistance must be finite and > 0");
        }
      },
      kind);
}

bool PadCircuit::connects_to(Rail rail) const {
  return std::visit(
      [rail](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, EsdPair>) return true;
        if constexpr (std::is_same_v<T, SeriesDiode> || std::is_same_v<T, Resistive>)
          return k.rail == rail;
        if constexpr (std::is_same_v<T, Led>) return rail == Rail::Gnd;
        return false;
      },
      kind);
}

ConsumptionCurve::ConsumptionCurve(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw Error(Errc::InvalidArgument, "consumption curve needs knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto [v, a] = knots_[i];
    if (!std::isfinite(v) || !std::isfinite(a))
      throw Error(Errc::InvalidArgument, "consumption knots must be finite");
    if (i > 0) {
      if (!(v > knots_[i - 1].first))
        throw Error(Errc::InvalidArgument, "consumption knot volts must increase");
      if (a < knots_[i - 1].second)
        throw Error(Errc::InvalidArgument, "consumption curve must be nondecreasing");
    }
  }
}

double ConsumptionCurve::at(double volts) const {
  if (volts <= knots_.front().first) return knots_.front().second;
  if (volts >= knots_.back().first) return knots_.back().second;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), volts,
                             [](double v, const auto& k) { return v < k.first; });
  const auto& [v1, a1] = *it;
  const auto& [v0, a0] = *(it - 1);
  if (volts == v0) return a0;
  const double t = (volts - v0) / (v1 - v0);
  return a0 + t * (a1 - a0);
}

void UutModel::validate() const {
  std::set<PadId> seen;
  for (const auto& pad : pads) {
    if (!text::is_identifier(pad.id))
      throw Error(Errc::InvalidArgument, "pad id '" + pad.id + "' is not an identifier");
    if (!seen.insert(pad.id).second)
      throw Error(Errc::InvalidArgument, "duplicate pad id '" + pad.id + "'");
    pad.circuit.validate();
  }
  auto check_rail = [](const RailState& rail) {
    if (const auto* b = std::get_if<Biased>(&rail); b && !std::isfinite(b->volts))
      throw Error(Errc::InvalidArgument, "rail bias must be finite");
    if (const auto* s = std::get_if<Sensed>(&rail)) {
      if (!(s->sink_limit >= 0.0) || !(s->sink_knee > 0.0) || !(s->bleed_ohms > 0.0))
        throw Error(Errc::InvalidArgument, "sensed rail needs sink_limit >= 0, knee > 0, bleed > 0");
    }
  };
  check_rail(vcc);
  check_rail(gnd);
  if (powered && !consumption)
    throw Error(Errc::InvalidArgument, "powered model requires a consumption map");
}

const Pad* UutModel::find(const PadId& id) const {
  auto it = std::find_if(pads.begin(), pads.end(), [&](const Pad& p) { return p.id == id; });
  return it == pads.end() ? nullptr : &*it;
}

Pad* UutModel::find(const PadId& id) {
  auto it = std::find_if(pads.begin(), pads.end(), [&](const Pad& p) { return p.id == id; });
  return it == pads.end() ? nullptr : &*it;
}

bool UutModel::has_capacitance() const {
  return std::any_of(pads.begin(), pads.end(),
                     [](const Pad& p) { return p.circuit.shunt_capacitance > 0.0; });
}

RailState UutModel::effective_rail(Rail rail) const {
  if (rail == Rail::Vcc) return powered ? RailState{Biased{supply_volts}} : vcc;
  return gnd;
}

void ContactState::validate() const {
  if (std::isnan(resistance) || resistance < 0.0)
    throw Error(Errc::InvalidArgument, "contact resistance must be >= 0");
  if (!(wear_rate >= 0.0) || !std::isfinite(wear_rate))
    throw Error(Errc::InvalidArgument, "wear rate must be finite and >= 0");
  if (!(open_threshold > 0.0))
    throw Error(Errc::InvalidArgument, "open threshold must be > 0");
}

ContactState wear_step(const ContactState& contact, std::uint64_t cycles) {
  ContactState next = contact;
  next.resistance = contact.resistance + contact.wear_rate * static_cast<double>(cycles);
  next.cycles = contact.cycles + cycles;
  return next;
}

}  // namespace vcit::sim
