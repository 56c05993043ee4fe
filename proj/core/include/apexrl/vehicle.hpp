#pragma once

#include <Eigen/Dense>

#include "apexrl/geometry.hpp"

namespace apexrl {

struct VehicleParams {
  double m = 800.0;            // kg
  double I_z = 3180.96;        // kg*m^2, default m*l_f*l_r single-track estimate
  double l_f = 2.115;          // m, CG to front axle
  double l_r = 1.88;           // m, CG to rear axle
  double C_alpha_f = 64000.0;  // N/rad
  double C_alpha_r = 64000.0;  // N/rad
  double w_veh = 2.0;          // m
  double length = 4.7;         // m
  double a_max = 12.0;         // m/s^2 actuator limit
  double delta_max = 0.4;      // rad actuator limit
  double u_min_dyn = 1.0;      // m/s validity floor of the slip-angle model

  void validate() const;
};

// X = [x, y, phi, u, v, omega]; beta derived. phi kept in (-pi, pi].
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double u = 0.0;      // longitudinal speed, body frame
  double v = 0.0;      // lateral speed, body frame
  double omega = 0.0;  // yaw rate
  double beta = 0.0;   // sideslip, arctan(v/u)
};

struct Control {
  double a = 0.0;      // commanded longitudinal acceleration, m/s^2
  double delta = 0.0;  // front steering angle, rad
};

struct TireOutputs {
  double alpha_f = 0.0;
  double alpha_r = 0.0;
  double F_yf = 0.0;
  double F_yr = 0.0;
};

using StateVec = Eigen::Matrix<double, 6, 1>;

// Linear tire model: alpha_f = delta - arctan((v + l_f w)/u),
// alpha_r = -arctan((v - l_r w)/u), F = C_alpha * alpha. No saturation.
// Throws DomainError when u is below the validity floor; integrator-internal
// stage evaluations use a clamped variant instead (see step_rk4).
TireOutputs slip_and_forces(const VehicleState& state, double delta, const VehicleParams& params);

// Right-hand side of the planar single-track model (small-angle lateral
// dynamics, commanded acceleration enters u_dot directly). Propagates the
// low-speed domain error.
StateVec derivatives(const VehicleState& state, const Control& control,
                     const VehicleParams& params);

// Classical RK4 with zero-order-hold controls. The entry state must satisfy
// u >= u_min_dyn (domain error otherwise, via the first stage); internal
// stage states clamp u up to the floor so strong braking cannot trip the
// error mid-step. phi is re-wrapped and beta recomputed on the result.
// Throws IntegrationBlowupError if the result is non-finite.
VehicleState step_rk4(const VehicleState& state, const Control& control, double dt,
                      const VehicleParams& params);

}  // namespace apexrl
