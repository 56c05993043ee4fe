#pragma once

#include <deque>

#include "apexrl/vehicle.hpp"

namespace apexrl {

struct EnvelopeParams {
  double mu = 1.0;
  double g = 9.81;
  double alpha_cbf = 2.0;  // class-K slope, 1/s
  int window_len = 10;     // steps averaged into the windowed costs
  double d_omega = 0.05;   // constraint threshold on windowed c_omega
  double d_beta = 0.05;    // constraint threshold on windowed c_beta

  void validate() const;
};

// Barrier values of the beta-omega operating envelope. Nonnegative values
// certify the state is inside the safe set.
struct BarrierValues {
  double h_omega = 0.0;  // mu*g/u - |omega|
  double h_beta1 = 0.0;  // beta_max - beta  (upper sideslip bound)
  double h_beta2 = 0.0;  // beta - beta_min  (lower sideslip bound)
};

struct SafetyCosts {
  double c_omega = 0.0;
  double c_beta = 0.0;
  double h_omega = 0.0;
  double h_beta1 = 0.0;
  double h_beta2 = 0.0;
  double windowed_c_omega = 0.0;
  double windowed_c_beta = 0.0;
};

// Rear-tire saturation sideslip angle: arctan(3 mu m g l_f / (C_ar (l_f+l_r))).
double alpha_r_peak(const VehicleParams& params, double mu, double g);

// Envelope barriers at a state. The sideslip bounds are the omega-sheared
// parallelogram beta in [-alpha_r_peak + l_r w/u, +alpha_r_peak + l_r w/u].
// Throws DomainError when u is below the dynamics floor.
BarrierValues barrier_values(const VehicleState& state, const VehicleParams& params,
                             const EnvelopeParams& env);

// Instantaneous constraint costs from consecutive-step barriers with hdot by
// backward difference: c = max(-(hdot + alpha*h_now), 0); the beta cost uses
// the more-binding (smaller) of its two barrier conditions.
struct InstantCosts {
  double c_omega = 0.0;
  double c_beta = 0.0;
};
InstantCosts cbf_costs(const BarrierValues& prev, const BarrierValues& now, double dt,
                       const EnvelopeParams& env);

// Sliding-window mean of the instantaneous costs, reset at episode start.
class CostWindow {
 public:
  explicit CostWindow(int window_len);
  void reset();
  SafetyCosts update(const BarrierValues& now, double c_omega, double c_beta);

 private:
  std::size_t cap_;
  std::deque<double> omega_;
  std::deque<double> beta_;
};

// Counts distinct entries into the unsafe region (not per-step dwell), per
// the unsafe-times lap metrics.
struct UnsafeCounter {
  int omega_entries = 0;
  int beta_entries = 0;
  bool in_omega = false;
  bool in_beta = false;

  void reset() { *this = UnsafeCounter{}; }
  void update(const BarrierValues& h);
};

}  // namespace apexrl
