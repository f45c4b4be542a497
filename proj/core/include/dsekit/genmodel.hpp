#pragma once

#include <Eigen/Dense>

#include "dsekit/errors.hpp"

namespace dsekit {

/// Machine constants of the fourth-order synchronous generator model.
/// Per-unit quantities on the machine base; time constants in seconds.
struct GeneratorParams {
  double omega0;     ///< nominal synchronous speed, elec.rad/s (2*pi*f0)
  double inertia_j;  ///< inertia coefficient J, s
  double damping_d;  ///< damping torque coefficient D, pu per pu speed
  double xd;         ///< d-axis synchronous reactance, pu
  double xq;         ///< q-axis synchronous reactance, pu
  double xd_p;       ///< d-axis transient reactance x'_d, pu
  double xq_p;       ///< q-axis transient reactance x'_q, pu
  double td0_p;      ///< d-axis open-circuit transient time constant, s
  double tq0_p;      ///< q-axis open-circuit transient time constant, s

  /// Throws std::invalid_argument if constants are out of range
  /// (nonpositive reactances/time constants, x' > x, ...).
  void validate() const;

  /// Round-number 60 Hz demo machine used by the default scenario.
  static GeneratorParams demo_machine();
};

/// Generator state [delta, dOmega, e'_q, e'_d].
struct GenState {
  double delta;   ///< rotor angle, elec.rad
  double domega;  ///< rotor speed deviation, pu
  double eq_p;    ///< q-axis transient voltage, pu
  double ed_p;    ///< d-axis transient voltage, pu

  Eigen::Vector4d vec() const { return {delta, domega, eq_p, ed_p}; }
  static GenState from_vec(const Eigen::Vector4d& v) {
    return {v(0), v(1), v(2), v(3)};
  }
  bool finite() const;
};

/// Exogenous generator inputs. vt is the PMU terminal-voltage magnitude.
struct GenInput {
  double tm;   ///< mechanical torque, pu
  double efd;  ///< exciter output voltage, pu
  double vt;   ///< terminal voltage magnitude, pu
};

/// Active/reactive power output pair, the measured quantities.
struct Measurement {
  double pt;  ///< active power, pu
  double qt;  ///< reactive power, pu

  Eigen::Vector2d vec() const { return {pt, qt}; }
};

/// d/q-axis stator currents.
struct DqCurrents {
  double id;
  double iq;
};

/// Stator currents consistent with the P/Q output map:
/// id = (e'_q - vt*cos(delta)) / x'_d, iq = vt*sin(delta) / xq.
DqCurrents currents(const GenState& s, const GenInput& u,
                    const GeneratorParams& p);

/// P/Q output map evaluated at a state.
Measurement measure(const GenState& s, const GenInput& u,
                    const GeneratorParams& p);

/// Continuous-time state derivative (per-second rates), returned in
/// GenState layout.
GenState dynamics_rhs(const GenState& s, const GenInput& u,
                      const GeneratorParams& p);

/// Classical RK4 over `substeps` equal steps of dt/substeps with the
/// input held constant. Throws NonFiniteState on blow-up.
GenState step_rk4(const GenState& s, const GenInput& u,
                  const GeneratorParams& p, double dt, int substeps);

/// Steady state for fixed inputs via damped Newton iteration with a
/// finite-difference Jacobian; converged when the residual max norm is
/// <= 1e-10. Throws NoConvergence after 200 iterations.
GenState find_equilibrium(const GenInput& u, const GeneratorParams& p,
                          const GenState& guess);

/// find_equilibrium from a generic loaded-machine guess.
GenState find_equilibrium(const GenInput& u, const GeneratorParams& p);

}  // namespace dsekit
