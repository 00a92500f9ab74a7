#include "network.hpp"

#include <cmath>
#include <string>

#include "vcit/error.hpp"

namespace vcit::sim::detail {

namespace {

NodeRef make_rail(const RailState& state, int& next_index) {
  NodeRef ref;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Grounded>) {
          ref.fixed = 0.0;
        } else if constexpr (std::is_same_v<T, Biased>) {
          ref.fixed = s.volts;
        } else {
          ref.index = next_index++;
        }
      },
      state);
  return ref;
}

}  // namespace

Network::Network(const UutModel& uut) {
  int next = static_cast<int>(uut.pads.size());
  const RailState vcc_state = uut.effective_rail(Rail::Vcc);
  const RailState gnd_state = uut.effective_rail(Rail::Gnd);
  vcc_ = make_rail(vcc_state, next);
  gnd_ = make_rail(gnd_state, next);
  size_ = next;

  auto rail_ref = [&](Rail r) { return r == Rail::Vcc ? vcc_ : gnd_; };

  for (std::size_t i = 0; i < uut.pads.size(); ++i) {
    const NodeRef pad{static_cast<int>(i), 0.0};
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, EsdPair>) {
            elements_.push_back({Element::Kind::Diode, pad, vcc_, &k.to_vcc});
            elements_.push_back({Element::Kind::Diode, gnd_, pad, &k.to_gnd});
          } else if constexpr (std::is_same_v<T, SeriesDiode>) {
            if (k.polarity == Polarity::Forward)
              elements_.push_back({Element::Kind::Diode, pad, rail_ref(k.rail), &k.diode});
            else
              elements_.push_back({Element::Kind::Diode, rail_ref(k.rail), pad, &k.diode});
          } else if constexpr (std::is_same_v<T, Led>) {
            elements_.push_back({Element::Kind::Diode, pad, gnd_, &k.diode});
          } else if constexpr (std::is_same_v<T, Resistive>) {
            elements_.push_back({Element::Kind::Resistor, pad, rail_ref(k.rail), nullptr, 1.0 / k.ohms});
          }
        },
        uut.pads[i].circuit.kind);
  }
  if (const auto* s = std::get_if<Sensed>(&vcc_state))
    elements_.push_back({Element::Kind::Sink, vcc_, NodeRef{-1, 0.0}, nullptr, 0.0, *s});
  if (const auto* s = std::get_if<Sensed>(&gnd_state))
    elements_.push_back({Element::Kind::Sink, gnd_, NodeRef{-1, 0.0}, nullptr, 0.0, *s});

  node_diodes_.resize(static_cast<std::size_t>(size_));
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    if (elements_[e].kind != Element::Kind::Diode) continue;
    if (elements_[e].anode.unknown()) node_diodes_[elements_[e].anode.index].push_back(e);
    if (elements_[e].cathode.unknown()) node_diodes_[elements_[e].cathode.index].push_back(e);
  }
}

void Network::assemble(const Eigen::VectorXd& x, Eigen::VectorXd& f, Eigen::MatrixXd& j) const {
  f.setZero(size_);
  j.setZero(size_, size_);

  auto stamp = [&](const NodeRef& a, const NodeRef& c, double current, double g) {
    if (a.unknown()) {
      f[a.index] += current;
      j(a.index, a.index) += g;
      if (c.unknown()) j(a.index, c.index) -= g;
    }
    if (c.unknown()) {
      f[c.index] -= current;
      j(c.index, c.index) += g;
      if (a.unknown()) j(c.index, a.index) -= g;
    }
  };

  for (const auto& e : elements_) {
    const double v = voltage(e.anode, x) - voltage(e.cathode, x);
    switch (e.kind) {
      case Element::Kind::Diode: {
        const auto ev = e.diode->evaluate(v);
        stamp(e.anode, e.cathode, ev.current, ev.conductance);
        break;
      }
      case Element::Kind::Resistor:
        stamp(e.anode, e.cathode, e.conductance * v, e.conductance);
        break;
      case Element::Kind::Sink: {
        const double t = std::tanh(v / e.sink.sink_knee);
        const double current = e.sink.sink_limit * t + v / e.sink.bleed_ohms;
        const double g = e.sink.sink_limit * (1.0 - t * t) / e.sink.sink_knee + 1.0 / e.sink.bleed_ohms;
        stamp(e.anode, e.cathode, current, g);
        break;
      }
    }
  }

  for (int i = 0; i < size_; ++i) {
    f[i] += kGmin * x[i];
    j(i, i) += kGmin;
  }

  for (const auto& inj : injections_) {
    if (inj.mode == DriveMode::Current) {
      if (inj.contact_conductance > 0.0) f[inj.node] -= inj.level;
    } else {
      f[inj.node] -= (inj.level - x[inj.node]) * inj.contact_conductance;
      j(inj.node, inj.node) += inj.contact_conductance;
    }
  }

  for (const auto& cap : caps_) {
    const double v = x[cap.node] - voltage(cap.gnd, x);
    stamp(NodeRef{cap.node, 0.0}, cap.gnd, cap.c_over_dt * (v - cap.v_old), cap.c_over_dt);
  }
}

double Network::limit_step(int node, double dx, const Eigen::VectorXd& x) const {
  double limited = dx;
  for (std::size_t e : node_diodes_[static_cast<std::size_t>(node)]) {
    const auto& el = elements_[e];
    const double sign = (el.anode.unknown() && el.anode.index == node) ? 1.0 : -1.0;
    const double delta = sign * dx;
    if (delta <= 0.0) continue;
    const double vf_old = voltage(el.anode, x) - voltage(el.cathode, x);
    const double vf_new = vf_old + delta;
    const double nvt = el.diode->emission_voltage();
    if (vf_new <= el.diode->critical_voltage() || delta <= 2.0 * nvt || vf_new <= nvt) continue;
    const double vf_lim = vf_old > 0.0 ? vf_old + nvt * std::log1p(delta / nvt)
                                       : nvt * std::log(vf_new / nvt);
    const double candidate = sign * (vf_lim - vf_old);
    if (std::abs(candidate) < std::abs(limited)) limited = candidate;
  }
  return limited;
}

Network::Result Network::newton(Eigen::VectorXd x, const SolverOptions& options,
                                const Interrupt& interrupt) const {
  if (x.size() != size_) x = Eigen::VectorXd::Zero(size_);
  Eigen::VectorXd f;
  Eigen::MatrixXd j;
  double residual = 0.0;
  for (int it = 0; it <= options.max_iterations; ++it) {
    assemble(x, f, j);
    residual = size_ == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    if (size_ == 0) return {x, 0.0, it};
    Eigen::VectorXd dx = j.partialPivLu().solve(-f);
    if (!dx.allFinite()) break;
    const double step = dx.cwiseAbs().maxCoeff();
    const double scale = x.cwiseAbs().maxCoeff();
    if (residual < options.residual_tolerance && step <= options.step_tolerance + 1e-12 * scale)
      return {x, residual, it};
    if (it == options.max_iterations) break;
    for (int i = 0; i < size_; ++i) dx[i] = limit_step(i, dx[i], x);
    x += dx;
    if (interrupt && interrupt(x)) return {x, residual, it + 1, true};
  }
  throw Error(Errc::NonConvergence,
              "Newton iteration did not converge (residual " + std::to_string(residual) + " A)",
              residual);
}

}  // namespace vcit::sim::detail
