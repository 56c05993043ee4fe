#include "apexrl/vehicle.hpp"

#include <cmath>
#include <string>

#include "apexrl/errors.hpp"

namespace apexrl {
namespace {

TireOutputs tire_forces(double u, double v, double omega, double delta,
                        const VehicleParams& p) {
  TireOutputs t;
  t.alpha_f = delta - std::atan((v + p.l_f * omega) / u);
  t.alpha_r = -std::atan((v - p.l_r * omega) / u);
  t.F_yf = p.C_alpha_f * t.alpha_f;
  t.F_yr = p.C_alpha_r * t.alpha_r;
  return t;
}

StateVec rhs(const StateVec& x, const Control& c, const VehicleParams& p) {
  const double phi = x[2];
  // Clamp keeps the slip-angle arctans well-defined at RK4 stage states that
  // momentarily dip below the floor; committed states are checked upstream.
  const double u = std::max(x[3], p.u_min_dyn);
  const double v = x[4];
  const double omega = x[5];
  const TireOutputs t = tire_forces(u, v, omega, c.delta, p);

  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double sin_d = std::sin(c.delta);
  const double cos_d = std::cos(c.delta);

  StateVec dx;
  dx[0] = u * cos_phi - v * sin_phi;
  dx[1] = u * sin_phi + v * cos_phi;
  dx[2] = omega;
  dx[3] = c.a + v * omega - t.F_yf * sin_d / p.m;
  dx[4] = -u * omega + (t.F_yf * cos_d + t.F_yr) / p.m;
  dx[5] = (p.l_f * t.F_yf * cos_d - p.l_r * t.F_yr) / p.I_z;
  return dx;
}

StateVec to_vec(const VehicleState& s) {
  StateVec x;
  x << s.x, s.y, s.phi, s.u, s.v, s.omega;
  return x;
}

void check_floor(const VehicleState& state, const VehicleParams& params) {
  if (!(state.u >= params.u_min_dyn)) {
    throw DomainError("longitudinal speed " + std::to_string(state.u) +
                      " m/s is below the dynamics floor " + std::to_string(params.u_min_dyn));
  }
}

}  // namespace

void VehicleParams::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!pos(m) || !pos(I_z) || !pos(l_f) || !pos(l_r) || !pos(C_alpha_f) || !pos(C_alpha_r) ||
      !pos(w_veh) || !pos(length) || !pos(a_max) || !pos(delta_max) || !pos(u_min_dyn)) {
    throw ConfigError("vehicle parameters must be strictly positive and finite");
  }
  if (!(l_f + l_r < length)) {
    throw ConfigError("wheelbase l_f + l_r must be shorter than the vehicle length");
  }
}

TireOutputs slip_and_forces(const VehicleState& state, double delta,
                            const VehicleParams& params) {
  check_floor(state, params);
  return tire_forces(state.u, state.v, state.omega, delta, params);
}

StateVec derivatives(const VehicleState& state, const Control& control,
                     const VehicleParams& params) {
  check_floor(state, params);
  return rhs(to_vec(state), control, params);
}

VehicleState step_rk4(const VehicleState& state, const Control& control, double dt,
                      const VehicleParams& params) {
  // Negative dt is allowed (reverse integration); zero is a caller bug.
  if (dt == 0.0 || !std::isfinite(dt)) throw ContractError("dt must be nonzero and finite");
  check_floor(state, params);

  const StateVec x0 = to_vec(state);
  const StateVec k1 = rhs(x0, control, params);
  const StateVec k2 = rhs(x0 + 0.5 * dt * k1, control, params);
  const StateVec k3 = rhs(x0 + 0.5 * dt * k2, control, params);
  const StateVec k4 = rhs(x0 + dt * k3, control, params);
  const StateVec x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (!x1.allFinite()) {
    throw IntegrationBlowupError("non-finite state after step: [" + std::to_string(x1[0]) + ", " +
                                 std::to_string(x1[1]) + ", " + std::to_string(x1[2]) + ", " +
                                 std::to_string(x1[3]) + ", " + std::to_string(x1[4]) + ", " +
                                 std::to_string(x1[5]) + "]");
  }

  VehicleState out;
  out.x = x1[0];
  out.y = x1[1];
  out.phi = wrap_angle(x1[2]);
  out.u = x1[3];
  out.v = x1[4];
  out.omega = x1[5];
  out.beta = std::atan(out.v / out.u);
  return out;
}

}  // namespace apexrl
