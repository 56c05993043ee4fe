#include "apexrl/safety.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "apexrl/errors.hpp"

namespace apexrl {

void EnvelopeParams::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!pos(mu) || !pos(g) || !pos(alpha_cbf) || !pos(d_omega) || !pos(d_beta)) {
    throw ConfigError("envelope parameters must be strictly positive and finite");
  }
  if (window_len < 1) throw ConfigError("window_len must be at least 1");
}

double alpha_r_peak(const VehicleParams& params, double mu, double g) {
  return std::atan(3.0 * mu * params.m * g * params.l_f /
                   (params.C_alpha_r * (params.l_f + params.l_r)));
}

BarrierValues barrier_values(const VehicleState& state, const VehicleParams& params,
                             const EnvelopeParams& env) {
  if (!(state.u >= params.u_min_dyn)) {
    throw DomainError("barrier_values: u " + std::to_string(state.u) +
                      " m/s is below the dynamics floor");
  }
  const double a_peak = alpha_r_peak(params, env.mu, env.g);
  const double shear = params.l_r * state.omega / state.u;
  BarrierValues h;
  h.h_omega = env.mu * env.g / state.u - std::abs(state.omega);
  h.h_beta1 = (a_peak + shear) - state.beta;
  h.h_beta2 = state.beta - (-a_peak + shear);
  return h;
}

InstantCosts cbf_costs(const BarrierValues& prev, const BarrierValues& now, double dt,
                       const EnvelopeParams& env) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double a = env.alpha_cbf;
  const double cond_omega = (now.h_omega - prev.h_omega) / dt + a * now.h_omega;
  const double cond_b1 = (now.h_beta1 - prev.h_beta1) / dt + a * now.h_beta1;
  const double cond_b2 = (now.h_beta2 - prev.h_beta2) / dt + a * now.h_beta2;
  InstantCosts c;
  c.c_omega = std::max(-cond_omega, 0.0);
  c.c_beta = std::max(-std::min(cond_b1, cond_b2), 0.0);
  return c;
}

CostWindow::CostWindow(int window_len) : cap_(static_cast<std::size_t>(window_len)) {
  if (window_len < 1) throw ConfigError("window_len must be at least 1");
}

void CostWindow::reset() {
  omega_.clear();
  beta_.clear();
}

SafetyCosts CostWindow::update(const BarrierValues& now, double c_omega, double c_beta) {
  omega_.push_back(c_omega);
  beta_.push_back(c_beta);
  if (omega_.size() > cap_) omega_.pop_front();
  if (beta_.size() > cap_) beta_.pop_front();

  const auto mean = [](const std::deque<double>& q) {
    return std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
  };
  SafetyCosts out;
  out.c_omega = c_omega;
  out.c_beta = c_beta;
  out.h_omega = now.h_omega;
  out.h_beta1 = now.h_beta1;
  out.h_beta2 = now.h_beta2;
  out.windowed_c_omega = mean(omega_);
  out.windowed_c_beta = mean(beta_);
  return out;
}

void UnsafeCounter::update(const BarrierValues& h) {
  const bool omega_bad = h.h_omega < 0.0;
  const bool beta_bad = std::min(h.h_beta1, h.h_beta2) < 0.0;
  if (omega_bad && !in_omega) ++omega_entries;
  if (beta_bad && !in_beta) ++beta_entries;
  in_omega = omega_bad;
  in_beta = beta_bad;
}

}  // namespace apexrl
