#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "apexrl/errors.hpp"
#include "apexrl/vehicle.hpp"

using namespace apexrl;

namespace {

VehicleState make_state(double u, double v, double omega, double phi = 0.0) {
  VehicleState s;
  s.u = u;
  s.v = v;
  s.omega = omega;
  s.phi = phi;
  s.beta = std::atan2(v, u);
  return s;
}

}  // namespace

TEST_CASE("params: defaults are consistent and validated") {
  VehicleParams p;
  CHECK(p.I_z == doctest::Approx(800.0 * 2.115 * 1.88).epsilon(1e-12));
  CHECK_NOTHROW(p.validate());
  p.m = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = VehicleParams{};
  p.length = 3.0;  // shorter than the wheelbase
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("slip_and_forces: straight running is force-free") {
  const TireOutputs out = slip_and_forces(make_state(20.0, 0.0, 0.0), 0.0, VehicleParams{});
  CHECK(out.alpha_f == 0.0);
  CHECK(out.alpha_r == 0.0);
  CHECK(out.F_yf == 0.0);
  CHECK(out.F_yr == 0.0);
}

TEST_CASE("slip_and_forces: frozen cornering oracle") {
  const TireOutputs out = slip_and_forces(make_state(20.0, 1.0, 0.1), 0.05, VehicleParams{});
  CHECK(out.alpha_f == doctest::Approx(-0.010501072789032534).epsilon(1e-12));
  CHECK(out.F_yf == doctest::Approx(-672.0686584980822).epsilon(1e-12));
  CHECK(out.alpha_r == doctest::Approx(-0.04057771423149962).epsilon(1e-12));
  CHECK(out.F_yr == doctest::Approx(-2596.9737108159757).epsilon(1e-12));
}

TEST_CASE("slip_and_forces: low-speed domain guard") {
  CHECK_THROWS_AS(slip_and_forces(make_state(0.5, 0.0, 0.0), 0.0, VehicleParams{}), DomainError);
  Control c;
  CHECK_THROWS_AS(derivatives(make_state(0.99, 0.0, 0.0), c, VehicleParams{}), DomainError);
  CHECK_NOTHROW(slip_and_forces(make_state(1.0, 0.0, 0.0), 0.0, VehicleParams{}));
}

TEST_CASE("derivatives: straight equilibrium and decoupled throttle") {
  Control c;
  const StateVec d0 = derivatives(make_state(30.0, 0.0, 0.0), c, VehicleParams{});
  CHECK(d0[0] == doctest::Approx(30.0).epsilon(1e-15));
  for (int i = 1; i < 6; ++i) CHECK(d0[i] == 0.0);

  c.a = 5.0;
  const StateVec d1 = derivatives(make_state(30.0, 0.0, 0.0), c, VehicleParams{});
  CHECK(d1[3] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(d1[4] == 0.0);
  CHECK(d1[5] == 0.0);
}

TEST_CASE("derivatives: steady-state cornering residual") {
  // Solve the small-angle single-track steady state for (v, omega) at fixed
  // (u, delta); the exact model's residual reflects only the atan curvature.
  const VehicleParams p;
  const double u = 20.0;
  const double delta = 0.03;
  const double cd = std::cos(delta);
  const double Ca = p.C_alpha_f;  // equal front/rear stiffness in Table 1
  Eigen::Matrix2d A;
  A << -(Ca * cd + Ca) / (p.m * u), -u - (Ca * cd * p.l_f - Ca * p.l_r) / (p.m * u),
      -(p.l_f * Ca * cd - p.l_r * Ca) / (p.I_z * u),
      -(p.l_f * p.l_f * Ca * cd + p.l_r * p.l_r * Ca) / (p.I_z * u);
  Eigen::Vector2d b(-Ca * cd * delta / p.m, -p.l_f * Ca * cd * delta / p.I_z);
  const Eigen::Vector2d vw = A.colPivHouseholderQr().solve(b);

  Control c;
  c.delta = delta;
  const StateVec d = derivatives(make_state(u, vw[0], vw[1]), c, p);
  CHECK(std::abs(d[4]) < 1e-3);  // v_dot
  CHECK(std::abs(d[5]) < 1e-3);  // omega_dot
}

TEST_CASE("derivatives: mirror symmetry") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uu(5.0, 40.0), vv(-3.0, 3.0), ww(-0.5, 0.5),
      dd(-0.3, 0.3), aa(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const double u = uu(rng), v = vv(rng), w = ww(rng), delta = dd(rng), a = aa(rng);
    Control c1;
    c1.a = a;
    c1.delta = delta;
    Control c2;
    c2.a = a;
    c2.delta = -delta;
    const StateVec d1 = derivatives(make_state(u, v, w), c1, VehicleParams{});
    const StateVec d2 = derivatives(make_state(u, -v, -w), c2, VehicleParams{});
    CHECK(d1[3] == doctest::Approx(d2[3]).epsilon(1e-12));   // u_dot even
    CHECK(d1[4] == doctest::Approx(-d2[4]).epsilon(1e-12));  // v_dot odd
    CHECK(d1[5] == doctest::Approx(-d2[5]).epsilon(1e-12));  // omega_dot odd
  }
}

TEST_CASE("step_rk4: linear flow is exact") {
  VehicleState s = make_state(30.0, 0.0, 0.0);
  s.x = 1.0;
  s.y = 2.0;
  const VehicleState n = step_rk4(s, Control{}, 0.02, VehicleParams{});
  CHECK(n.x == doctest::Approx(1.0 + 30.0 * 0.02).epsilon(1e-15));
  CHECK(n.y == 2.0);
  CHECK(n.u == 30.0);
  CHECK(n.v == 0.0);
  CHECK(n.omega == 0.0);
  CHECK(n.beta == 0.0);
}

TEST_CASE("step_rk4: determinism") {
  VehicleState s = make_state(22.0, 0.4, 0.1, 0.3);
  Control c;
  c.a = 2.0;
  c.delta = 0.05;
  const VehicleState a = step_rk4(s, c, 0.02, VehicleParams{});
  const VehicleState b = step_rk4(s, c, 0.02, VehicleParams{});
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.phi == b.phi);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.omega == b.omega);
}

TEST_CASE("step_rk4: fourth-order convergence on a cornering maneuver") {
  const VehicleParams p;
  Control c;
  c.a = 0.5;
  c.delta = 0.05;
  auto roll = [&](double dt) {
    VehicleState s = make_state(15.0, 0.0, 0.0);
    const int n = static_cast<int>(std::round(2.0 / dt));
    for (int i = 0; i < n; ++i) s = step_rk4(s, c, dt, p);
    return s;
  };
  const VehicleState ref = roll(1e-4);
  auto err = [&](const VehicleState& s) {
    return std::sqrt((s.x - ref.x) * (s.x - ref.x) + (s.y - ref.y) * (s.y - ref.y) +
                     (s.u - ref.u) * (s.u - ref.u) + (s.v - ref.v) * (s.v - ref.v) +
                     (s.omega - ref.omega) * (s.omega - ref.omega));
  };
  const double e_coarse = err(roll(0.02));
  const double e_fine = err(roll(0.01));
  CHECK(e_coarse / e_fine >= 12.0);
}

TEST_CASE("step_rk4: near-reversibility at small dt") {
  const VehicleParams p;
  Control c;
  c.a = 1.0;
  c.delta = 0.04;
  const VehicleState s0 = make_state(18.0, 0.2, 0.05, 0.4);
  const VehicleState fwd = step_rk4(s0, c, 0.001, p);
  const VehicleState back = step_rk4(fwd, c, -0.001, p);
  CHECK(back.x == doctest::Approx(s0.x).epsilon(1e-6));
  CHECK(back.y == doctest::Approx(s0.y).epsilon(1e-6));
  CHECK(back.u == doctest::Approx(s0.u).epsilon(1e-6));
  CHECK(back.v == doctest::Approx(s0.v).epsilon(1e-6));
  CHECK(back.omega == doctest::Approx(s0.omega).epsilon(1e-6));
}

TEST_CASE("step_rk4: strong braking does not trip the floor mid-step") {
  // One step from just above the floor with hard braking: internal stages
  // clamp u, the committed result is still reported.
  VehicleState s = make_state(1.05, 0.0, 0.0);
  Control c;
  c.a = -12.0;
  const VehicleState n = step_rk4(s, c, 0.02, VehicleParams{});
  CHECK(std::isfinite(n.u));
  // Entry below the floor is the caller's contract violation.
  CHECK_THROWS_AS(step_rk4(make_state(0.5, 0.0, 0.0), c, 0.02, VehicleParams{}), DomainError);
}

TEST_CASE("step_rk4: phi stays wrapped and beta is consistent") {
  VehicleState s = make_state(20.0, 1.0, 2.5, 3.1);
  Control c;
  c.delta = 0.2;
  VehicleState n = s;
  for (int i = 0; i < 100; ++i) n = step_rk4(n, c, 0.02, VehicleParams{});
  CHECK(n.phi > -kPi);
  CHECK(n.phi <= kPi);
  CHECK(n.beta == doctest::Approx(std::atan2(n.v, n.u)).epsilon(1e-15));
}

TEST_CASE("step_rk4: non-finite result raises a blowup error") {
  VehicleState s = make_state(20.0, 1e200, 1e200);
  CHECK_THROWS_AS(step_rk4(s, Control{}, 0.02, VehicleParams{}), IntegrationBlowupError);
  CHECK_THROWS_AS(step_rk4(make_state(20.0, 0.0, 0.0), Control{}, 0.0, VehicleParams{}),
                  ContractError);
}
