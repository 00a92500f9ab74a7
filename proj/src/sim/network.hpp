#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "vcit/sim/solver.hpp"

namespace vcit::sim::detail {

/// A node is either an unknown (index >= 0) or pinned to a fixed voltage.
struct NodeRef {
  int index = -1;
  double fixed = 0.0;

  bool unknown() const { return index >= 0; }
};

struct Element {
  enum class Kind { Diode, Resistor, Sink };
  Kind kind;
  NodeRef anode;  // current flows anode -> cathode for positive voltage
  NodeRef cathode;
  const DiodeModel* diode = nullptr;
  double conductance = 0.0;
  Sensed sink{};
};

/// Source attached to a pad node through its contact.
struct Injection {
  int node = -1;
  DriveMode mode = DriveMode::Current;
  double level = 0.0;
  double contact_conductance = 0.0;  // 0 for an open needle
};

struct Capacitor {
  int node = -1;
  NodeRef gnd;
  double c_over_dt = 0.0;
  double v_old = 0.0;
};

/// Star network of one UUT: pad nodes first, then any floating rails.
class Network {
 public:
  explicit Network(const UutModel& uut);

  int size() const { return size_; }
  int pad_node(std::size_t pad_index) const { return static_cast<int>(pad_index); }
  NodeRef rail(Rail r) const { return r == Rail::Vcc ? vcc_ : gnd_; }

  void set_injections(std::vector<Injection> injections) { injections_ = std::move(injections); }
  void set_capacitors(std::vector<Capacitor> caps) { caps_ = std::move(caps); }

  double voltage(const NodeRef& n, const Eigen::VectorXd& x) const {
    return n.unknown() ? x[n.index] : n.fixed;
  }

  /// KCL residual (current leaving each node) and its Jacobian.
  void assemble(const Eigen::VectorXd& x, Eigen::VectorXd& f, Eigen::MatrixXd& j) const;

  struct Result {
    Eigen::VectorXd x;
    double residual = 0.0;
    int iterations = 0;
    bool interrupted = false;
  };

  /// Polled after every update; returning true abandons the solve.
  using Interrupt = std::function<bool(const Eigen::VectorXd&)>;

  /// Damped Newton-Raphson. Forward junction steps are compressed
  /// logarithmically; everything else takes the full step.
  Result newton(Eigen::VectorXd x, const SolverOptions& options,
                const Interrupt& interrupt = {}) const;

  static constexpr double kGmin = 1e-12;  // S, every solved node to reference

 private:
  double limit_step(int node, double dx, const Eigen::VectorXd& x) const;

  int size_ = 0;
  NodeRef vcc_;
  NodeRef gnd_;
  std::vector<Element> elements_;
  std::vector<std::vector<std::size_t>> node_diodes_;  // element indices per node
  std::vector<Injection> injections_;
  std::vector<Capacitor> caps_;
};

}  // namespace vcit::sim::detail
