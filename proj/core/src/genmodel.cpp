#include "dsekit/genmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dsekit {

void GeneratorParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("GeneratorParams: ") + name +
                                  " must be positive and finite");
    }
  };
  positive(omega0, "omega0");
  positive(inertia_j, "inertia_j");
  positive(xd, "xd");
  positive(xq, "xq");
  positive(xd_p, "xd_p");
  positive(xq_p, "xq_p");
  positive(td0_p, "td0_p");
  positive(tq0_p, "tq0_p");
  if (!(damping_d >= 0.0) || !std::isfinite(damping_d)) {
    throw std::invalid_argument("GeneratorParams: damping_d must be >= 0");
  }
  if (xd_p > xd || xq_p > xq) {
    throw std::invalid_argument(
        "GeneratorParams: transient reactances must not exceed synchronous");
  }
}

GeneratorParams GeneratorParams::demo_machine() {
  GeneratorParams p{};
  p.omega0 = 2.0 * std::numbers::pi * 60.0;
  p.inertia_j = 6.4;
  p.damping_d = 2.0;
  p.xd = 1.72;
  p.xq = 1.66;
  p.xd_p = 0.23;
  p.xq_p = 0.38;
  p.td0_p = 8.0;
  p.tq0_p = 0.4;
  return p;
}

bool GenState::finite() const {
  return std::isfinite(delta) && std::isfinite(domega) &&
         std::isfinite(eq_p) && std::isfinite(ed_p);
}

DqCurrents currents(const GenState& s, const GenInput& u,
                    const GeneratorParams& p) {
  return {(s.eq_p - u.vt * std::cos(s.delta)) / p.xd_p,
          u.vt * std::sin(s.delta) / p.xq};
}

Measurement measure(const GenState& s, const GenInput& u,
                    const GeneratorParams& p) {
  const double sin_d = std::sin(s.delta);
  const double cos_d = std::cos(s.delta);
  const double pt = (u.vt / p.xd_p) * s.eq_p * sin_d +
                    0.5 * u.vt * u.vt * (1.0 / p.xq - 1.0 / p.xd_p) *
                        std::sin(2.0 * s.delta);
  const double qt = (u.vt / p.xd_p) * s.eq_p * cos_d -
                    u.vt * u.vt *
                        (sin_d * sin_d / p.xq + cos_d * cos_d / p.xd_p);
  return {pt, qt};
}

GenState dynamics_rhs(const GenState& s, const GenInput& u,
                      const GeneratorParams& p) {
  const DqCurrents i = currents(s, u, p);
  const double te = measure(s, u, p).pt;  // air-gap torque = active power
  GenState rate{};
  rate.delta = p.omega0 * s.domega;
  rate.domega = (u.tm - te - p.damping_d * s.domega) / p.inertia_j;
  rate.eq_p = (u.efd - s.eq_p - (p.xd - p.xd_p) * i.id) / p.td0_p;
  rate.ed_p = (-s.ed_p + (p.xq - p.xq_p) * i.iq) / p.tq0_p;
  return rate;
}

GenState step_rk4(const GenState& s, const GenInput& u,
                  const GeneratorParams& p, double dt, int substeps) {
  if (!(dt > 0.0) || substeps < 1) {
    throw std::invalid_argument("step_rk4: dt must be > 0, substeps >= 1");
  }
  const double h = dt / substeps;
  Eigen::Vector4d x = s.vec();
  auto f = [&](const Eigen::Vector4d& v) {
    return dynamics_rhs(GenState::from_vec(v), u, p).vec();
  };
  for (int step = 0; step < substeps; ++step) {
    const Eigen::Vector4d k1 = f(x);
    const Eigen::Vector4d k2 = f(x + 0.5 * h * k1);
    const Eigen::Vector4d k3 = f(x + 0.5 * h * k2);
    const Eigen::Vector4d k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw NonFiniteState("step_rk4: state diverged");
    }
  }
  return GenState::from_vec(x);
}

namespace {

Eigen::Vector4d residual(const Eigen::Vector4d& x, const GenInput& u,
                         const GeneratorParams& p) {
  return dynamics_rhs(GenState::from_vec(x), u, p).vec();
}

}  // namespace

GenState find_equilibrium(const GenInput& u, const GeneratorParams& p,
                          const GenState& guess) {
  constexpr int kMaxIterations = 200;
  constexpr double kTol = 1e-10;

  Eigen::Vector4d x = guess.vec();
  Eigen::Vector4d r = residual(x, u, p);

  for (int it = 0; it < kMaxIterations; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= kTol) {
      return GenState::from_vec(x);
    }

    // Central-difference Jacobian.
    Eigen::Matrix4d jac;
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
      Eigen::Vector4d xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (residual(xp, u, p) - residual(xm, u, p)) / (2.0 * h);
    }

    Eigen::Vector4d step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) {
      throw NoConvergence("find_equilibrium: singular Jacobian");
    }

    // Backtrack until the residual norm decreases.
    const double norm0 = r.lpNorm<Eigen::Infinity>();
    double scale = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::Vector4d cand = x + scale * step;
      Eigen::Vector4d rc = residual(cand, u, p);
      if (rc.allFinite() && rc.lpNorm<Eigen::Infinity>() < norm0) {
        x = cand;
        r = rc;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      throw NoConvergence(
          "find_equilibrium: stalled (operating point may be infeasible)");
    }
  }
  throw NoConvergence("find_equilibrium: no convergence after 200 iterations");
}

GenState find_equilibrium(const GenInput& u, const GeneratorParams& p) {
  return find_equilibrium(u, p, GenState{0.3, 0.0, 1.0, 0.2});
}

}  // namespace dsekit
