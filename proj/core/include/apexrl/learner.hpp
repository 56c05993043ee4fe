#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "apexrl/env.hpp"
#include "apexrl/mlp.hpp"
#include "apexrl/policy.hpp"
#include "apexrl/replay.hpp"

namespace apexrl {

// Actor, twin reward critics, twin cost critics per constraint, and their
// targets, plus the log-parameterized entropy weight. Critics take [obs;
// action] stacked as input and emit one scalar per column.
struct LearnerNets {
  Mlp actor;
  Mlp q1, q2, q1_t, q2_t;
  Mlp qc_omega1, qc_omega2, qc_omega1_t, qc_omega2_t;
  Mlp qc_beta1, qc_beta2, qc_beta1_t, qc_beta2_t;
  double log_upsilon = 0.0;

  AdamState opt_actor, opt_q1, opt_q2;
  AdamState opt_qc_omega1, opt_qc_omega2, opt_qc_beta1, opt_qc_beta2;

  static LearnerNets make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                          double upsilon_init, std::mt19937_64& rng);

  int obs_dim() const { return actor.input_dim(); }
  int act_dim() const { return actor.output_dim() / 2; }
  double upsilon() const { return std::exp(log_upsilon); }
  long long total_skipped() const;
};

// Dual variables and constraint thresholds of the Lagrangian relaxation.
struct LagrangianState {
  double lambda_omega = 0.0;
  double lambda_beta = 0.0;
  double lr_lambda = 5e-5;
  double d_omega = 0.05;
  double d_beta = 0.05;
};

struct SacParams {
  double gamma = 0.99;
  double lr = 1e-4;
  double lr_entropy = 1e-4;
  double polyak = 0.005;
  double target_entropy = -2.0;  // minus the action dimension
};

// --- Update operations (one Adam/gradient step each) ---------------------

// Twin reward critics regress to r + gamma*(1-done)*(min target - ups*logpi).
// Returns the mean of the two MSE losses.
double update_critics(LearnerNets& nets, const ReplayBuffer::Batch& batch, const SacParams& sac,
                      std::mt19937_64& rng);

// Twin cost critics per constraint regress to c + gamma*(1-done)*max target
// (pessimistic, no entropy term). Returns the mean MSE across the four nets.
double update_cost_critics(LearnerNets& nets, const ReplayBuffer::Batch& batch,
                           const SacParams& sac, std::mt19937_64& rng);

// Actor step on E[ups*logpi - min Q + sum_k lambda_k ReLU(max Q^k - d_k)];
// gradients reach the actor only through the sampled action (critic
// parameters frozen). Returns the loss value.
double update_actor(LearnerNets& nets, const LagrangianState& lag,
                    const ReplayBuffer::Batch& batch, const SacParams& sac,
                    std::mt19937_64& rng);

// Dual ascent on the batch-mean predicted cost at fresh policy actions:
// lambda_k <- max(0, lambda_k + lr_lambda*(Cbar_k - d_k)).
struct LambdaTelemetry {
  double c_bar_omega = 0.0;
  double c_bar_beta = 0.0;
};
LambdaTelemetry update_lambda(const LearnerNets& nets, LagrangianState& lag,
                              const ReplayBuffer::Batch& batch, std::mt19937_64& rng);

// Gradient step on log upsilon toward the entropy target.
void update_entropy(LearnerNets& nets, const ReplayBuffer::Batch& batch, const SacParams& sac,
                    std::mt19937_64& rng);

void soft_update_targets(LearnerNets& nets, double polyak);

// Greedy (zero-noise) action for one observation.
Eigen::VectorXd act_deterministic(const Mlp& actor, const Eigen::VectorXd& obs);

// Stochastic action; the noise is drawn from rng.
Eigen::VectorXd act_stochastic(const Mlp& actor, const Eigen::VectorXd& obs,
                               std::mt19937_64& rng);

// --- Training orchestration ----------------------------------------------

struct LearnerConfig {
  std::vector<int> hidden = {256, 256, 256};
  std::size_t buffer_capacity = 200000;
  int batch = 256;
  SacParams sac;
  double lr_lambda = 5e-5;
  double upsilon_init = 0.2;
  long long t_max = 250000;
  long long t_start = 20000;
  long long t_switch = 200000;
  int eval_every = 2000;
  int eval_episodes = 3;
  int final_eval_episodes = 20;  // K
  long long skip_budget = 100;   // abort when non-finite events exceed this
  bool ablate_dc = false;        // "w/o DC": lambdas pinned at 0, cost critics idle

  void validate() const;
};

struct EvalEpisode {
  bool completed = false;
  int steps = 0;
  double lap_time = 0.0;  // elapsed seconds (full lap time when completed)
  double lap_avg_speed = 0.0;
  double lap_progress_pct = 0.0;
  double omega_unsafe_per_s = 0.0;
  double beta_unsafe_per_s = 0.0;
  double mean_windowed_c_omega = 0.0;
  double mean_windowed_c_beta = 0.0;
  double return_sum = 0.0;
};

struct EvalSummary {
  long long t = 0;  // training step of the snapshot
  std::vector<EvalEpisode> episodes;

  double mean(double EvalEpisode::* field) const;
  double stddev(double EvalEpisode::* field) const;
};

// Deterministic rollout of the actor through `episodes` episodes.
EvalSummary evaluate(const Mlp& actor, RaceEnv& env, int episodes, std::uint64_t seed_base);

struct UpdateRow {
  long long t = 0;
  double critic_loss = 0.0;
  double cost_critic_loss = 0.0;
  double actor_loss = 0.0;
  double lambda_omega = 0.0;
  double lambda_beta = 0.0;
  double upsilon = 0.0;
  double c_bar_omega = 0.0;
  double c_bar_beta = 0.0;
};

struct EpisodeRow {
  long long t_end = 0;
  int steps = 0;
  double return_sum = 0.0;
  double progress_pct = 0.0;
  bool completed = false;
  bool terminated = false;
};

struct TrainReport {
  std::uint64_t seed = 0;
  long long steps = 0;
  std::vector<double> u_tar;  // per env step
  std::vector<int> stage;     // per env step (1 or 2)
  std::vector<UpdateRow> updates;
  std::vector<EpisodeRow> episodes;
  std::vector<EvalSummary> evals;
  EvalSummary final_eval;
  long long skipped_updates = 0;
  long long rejected_transitions = 0;
};

// The full training loop: act, store, update after t_start, switch stage at
// t_switch, periodic evaluation snapshots, final K-episode evaluation.
class Trainer {
 public:
  Trainer(const TrackModel& track, const RacingLine& line, const VehicleParams& vehicle,
          const GGVParams& ggv, const EnvelopeParams& envelope, const EnvConfig& env_cfg,
          const LearnerConfig& cfg, std::uint64_t seed);

  TrainReport train();

  LearnerNets& nets() { return nets_; }
  const LearnerNets& nets() const { return nets_; }
  LagrangianState& lagrangian() { return lag_; }

 private:
  RaceEnv env_;
  RaceEnv eval_env_;
  LearnerConfig cfg_;
  EnvelopeParams envelope_;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  LearnerNets nets_;
  LagrangianState lag_;
  ReplayBuffer buffer_;
};

}  // namespace apexrl
