#include <doctest.h>

#include <cmath>

#include "apexrl/errors.hpp"
#include "apexrl/safety.hpp"

using namespace apexrl;

namespace {

VehicleState state_of(double u, double v, double omega) {
  VehicleState s;
  s.u = u;
  s.v = v;
  s.omega = omega;
  s.beta = std::atan(v / u);
  return s;
}

BarrierValues bar(double h_omega, double h_beta1, double h_beta2) {
  BarrierValues h;
  h.h_omega = h_omega;
  h.h_beta1 = h_beta1;
  h.h_beta2 = h_beta2;
  return h;
}

}  // namespace

TEST_CASE("alpha_r_peak: frozen oracle and limits") {
  const VehicleParams p;
  CHECK(alpha_r_peak(p, 1.0, 9.81) == doctest::Approx(0.19234950841248621).epsilon(1e-12));
  CHECK(alpha_r_peak(p, 0.0, 9.81) == 0.0);

  VehicleParams stiff = p;
  stiff.C_alpha_r = 2.0 * p.C_alpha_r;
  const double ratio = alpha_r_peak(stiff, 1.0, 9.81) / alpha_r_peak(p, 1.0, 9.81);
  CHECK(ratio > 0.49);
  CHECK(ratio < 0.51);
}

TEST_CASE("barrier_values: yaw-rate barrier arithmetic") {
  const EnvelopeParams env;
  const BarrierValues h = barrier_values(state_of(19.62, 0.0, 0.3), VehicleParams{}, env);
  CHECK(h.h_omega == doctest::Approx(0.2).epsilon(1e-12));

  // Exactly on the yaw-rate boundary.
  const BarrierValues hb = barrier_values(state_of(19.62, 0.0, 0.5), VehicleParams{}, env);
  CHECK(hb.h_omega == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("barrier_values: symmetric envelope at zero yaw rate") {
  const EnvelopeParams env;
  const double peak = alpha_r_peak(VehicleParams{}, env.mu, env.g);
  const BarrierValues h = barrier_values(state_of(20.0, 0.0, 0.0), VehicleParams{}, env);
  CHECK(h.h_beta1 == doctest::Approx(peak).epsilon(1e-12));
  CHECK(h.h_beta2 == doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("barrier_values: omega shear moves both sideslip bounds") {
  const EnvelopeParams env;
  const VehicleParams p;
  const double u = 25.0;
  const double omega = 0.2;
  const double beta = 0.01;
  VehicleState s;
  s.u = u;
  s.v = u * std::tan(beta);
  s.omega = omega;
  s.beta = beta;
  const double peak = alpha_r_peak(p, env.mu, env.g);
  const double shear = p.l_r * omega / u;
  const BarrierValues h = barrier_values(s, p, env);
  CHECK(h.h_beta1 == doctest::Approx(peak + shear - beta).epsilon(1e-12));
  CHECK(h.h_beta2 == doctest::Approx(beta - (-peak + shear)).epsilon(1e-12));
}

TEST_CASE("barrier_values: mirror symmetry swaps the sideslip barriers") {
  const EnvelopeParams env;
  const VehicleParams p;
  const BarrierValues a = barrier_values(state_of(22.0, 1.1, 0.25), p, env);
  const BarrierValues b = barrier_values(state_of(22.0, -1.1, -0.25), p, env);
  CHECK(a.h_omega == doctest::Approx(b.h_omega).epsilon(1e-15));
  CHECK(a.h_beta1 == doctest::Approx(b.h_beta2).epsilon(1e-12));
  CHECK(a.h_beta2 == doctest::Approx(b.h_beta1).epsilon(1e-12));
}

TEST_CASE("barrier_values: low-speed domain guard") {
  CHECK_THROWS_AS(barrier_values(state_of(0.5, 0.0, 0.0), VehicleParams{}, EnvelopeParams{}),
                  DomainError);
}

TEST_CASE("cbf_costs: satisfied, violated, and binding-side cases") {
  const EnvelopeParams env;  // alpha = 2
  const double dt = 0.02;

  // h_now = 0 makes hdot + alpha*h equal to (h_now - h_prev)/dt.
  auto costs = [&](double cond_omega, double cond_b1, double cond_b2) {
    const BarrierValues now = bar(0.0, 0.0, 0.0);
    const BarrierValues prev = bar(-cond_omega * dt, -cond_b1 * dt, -cond_b2 * dt);
    return cbf_costs(prev, now, dt, env);
  };

  CHECK(costs(0.2, 1.0, 1.0).c_omega == doctest::Approx(0.0));
  CHECK(costs(-0.4, 1.0, 1.0).c_omega == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(costs(0.2, 1.0, -0.3).c_beta == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(costs(0.2, -0.3, 1.0).c_beta == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(costs(0.2, 0.5, 0.4).c_beta == doctest::Approx(0.0));
  CHECK_THROWS_AS(cbf_costs(bar(0, 0, 0), bar(0, 0, 0), 0.0, env), DomainError);
}

TEST_CASE("cbf_costs: alpha term is included") {
  EnvelopeParams env;
  env.alpha_cbf = 2.0;
  // Constant barriers: hdot = 0, so the condition is alpha*h.
  const InstantCosts c = cbf_costs(bar(-0.1, 1.0, 1.0), bar(-0.1, 1.0, 1.0), 0.02, env);
  CHECK(c.c_omega == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("CostWindow: sliding means") {
  CostWindow w(4);
  const BarrierValues h = bar(1.0, 1.0, 1.0);
  w.update(h, 0.0, 0.0);
  w.update(h, 0.0, 0.0);
  w.update(h, 0.0, 0.0);
  const SafetyCosts c4 = w.update(h, 0.8, 0.0);
  CHECK(c4.windowed_c_omega == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c4.windowed_c_beta == doctest::Approx(0.0));
  CHECK(c4.c_omega == doctest::Approx(0.8));
  CHECK(c4.h_omega == doctest::Approx(1.0));

  // Window slides: a fifth zero push drops the first zero, mean unchanged;
  // three more drop the 0.8.
  const SafetyCosts c5 = w.update(h, 0.0, 0.0);
  CHECK(c5.windowed_c_omega == doctest::Approx(0.2).epsilon(1e-12));
  w.update(h, 0.0, 0.0);
  w.update(h, 0.0, 0.0);
  const SafetyCosts c8 = w.update(h, 0.0, 0.0);
  CHECK(c8.windowed_c_omega == doctest::Approx(0.0));

  w.reset();
  const SafetyCosts r1 = w.update(h, 0.5, 0.1);
  CHECK(r1.windowed_c_omega == doctest::Approx(0.5));
  CHECK(r1.windowed_c_beta == doctest::Approx(0.1));
}

TEST_CASE("UnsafeCounter: counts entries, not dwell time") {
  UnsafeCounter c;
  c.update(bar(1.0, 1.0, 1.0));   // safe
  c.update(bar(-0.1, 1.0, 1.0));  // enter omega-unsafe
  c.update(bar(-0.2, 1.0, 1.0));  // still inside: no new entry
  c.update(bar(0.5, 1.0, 1.0));   // leave
  c.update(bar(-0.1, 1.0, 1.0));  // second entry
  CHECK(c.omega_entries == 2);
  CHECK(c.beta_entries == 0);

  c.update(bar(1.0, -0.1, 1.0));  // beta side 1 breach
  c.update(bar(1.0, 1.0, -0.1));  // still beta-unsafe (other side): same visit
  CHECK(c.beta_entries == 1);
  c.update(bar(1.0, 1.0, 1.0));
  c.update(bar(1.0, 1.0, -0.2));
  CHECK(c.beta_entries == 2);

  c.reset();
  CHECK(c.omega_entries == 0);
  CHECK(c.in_omega == false);
}

TEST_CASE("EnvelopeParams: validation") {
  EnvelopeParams env;
  CHECK_NOTHROW(env.validate());
  env.alpha_cbf = 0.0;
  CHECK_THROWS_AS(env.validate(), ConfigError);
  env = EnvelopeParams{};
  env.window_len = 0;
  CHECK_THROWS_AS(env.validate(), ConfigError);
  CHECK_THROWS_AS(CostWindow(0), ConfigError);
}
