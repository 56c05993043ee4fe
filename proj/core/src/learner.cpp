#include "apexrl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "apexrl/errors.hpp"

namespace apexrl {
namespace {

Eigen::MatrixXd gauss(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act) {
  Eigen::MatrixXd x(obs.rows() + act.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(act.rows()) = act;
  return x;
}

// One squared-error regression step of `net` toward targets y.
double regress(Mlp& net, AdamState& opt, const Eigen::MatrixXd& input,
               const Eigen::RowVectorXd& y, double lr) {
  const auto b = static_cast<double>(input.cols());
  Tape tape;
  const Eigen::RowVectorXd pred = forward(net, input, &tape).row(0);
  const Eigen::RowVectorXd err = pred - y;
  const double loss = err.squaredNorm() / b;
  Eigen::MatrixXd out_grad = (2.0 / b) * err;
  Gradients grads;
  backward(net, tape, out_grad, grads);
  adam_step(net, opt, grads, lr);
  return loss;
}

struct FreshSample {
  PolicyHead head;
  PolicySample sample;
  Tape tape;  // actor tape (only filled when requested)
};

FreshSample sample_policy(const Mlp& actor, const Eigen::MatrixXd& obs, std::mt19937_64& rng,
                          bool with_tape) {
  FreshSample fs;
  const Eigen::MatrixXd raw = forward(actor, obs, with_tape ? &fs.tape : nullptr);
  fs.head = split_head(raw);
  fs.sample = policy_sample(fs.head, gauss(fs.head.mean.rows(), fs.head.mean.cols(), rng));
  return fs;
}

}  // namespace

LearnerNets LearnerNets::make(int obs_dim, int act_dim, const std::vector<int>& hidden,
                              double upsilon_init, std::mt19937_64& rng) {
  if (upsilon_init <= 0.0) throw ContractError("upsilon_init must be positive");
  std::vector<int> actor_w{obs_dim};
  actor_w.insert(actor_w.end(), hidden.begin(), hidden.end());
  actor_w.push_back(2 * act_dim);
  std::vector<int> critic_w{obs_dim + act_dim};
  critic_w.insert(critic_w.end(), hidden.begin(), hidden.end());
  critic_w.push_back(1);

  LearnerNets n;
  n.actor = Mlp::make(actor_w, rng, 0.01);
  n.q1 = Mlp::make(critic_w, rng);
  n.q2 = Mlp::make(critic_w, rng);
  n.qc_omega1 = Mlp::make(critic_w, rng);
  n.qc_omega2 = Mlp::make(critic_w, rng);
  n.qc_beta1 = Mlp::make(critic_w, rng);
  n.qc_beta2 = Mlp::make(critic_w, rng);
  n.q1_t = n.q1;
  n.q2_t = n.q2;
  n.qc_omega1_t = n.qc_omega1;
  n.qc_omega2_t = n.qc_omega2;
  n.qc_beta1_t = n.qc_beta1;
  n.qc_beta2_t = n.qc_beta2;
  n.log_upsilon = std::log(upsilon_init);

  n.opt_actor = AdamState::zeros_like(n.actor);
  n.opt_q1 = AdamState::zeros_like(n.q1);
  n.opt_q2 = AdamState::zeros_like(n.q2);
  n.opt_qc_omega1 = AdamState::zeros_like(n.qc_omega1);
  n.opt_qc_omega2 = AdamState::zeros_like(n.qc_omega2);
  n.opt_qc_beta1 = AdamState::zeros_like(n.qc_beta1);
  n.opt_qc_beta2 = AdamState::zeros_like(n.qc_beta2);
  return n;
}

long long LearnerNets::total_skipped() const {
  return opt_actor.skipped + opt_q1.skipped + opt_q2.skipped + opt_qc_omega1.skipped +
         opt_qc_omega2.skipped + opt_qc_beta1.skipped + opt_qc_beta2.skipped;
}

double update_critics(LearnerNets& nets, const ReplayBuffer::Batch& batch, const SacParams& sac,
                      std::mt19937_64& rng) {
  const FreshSample next = sample_policy(nets.actor, batch.next_obs, rng, false);
  const Eigen::MatrixXd xp = stack(batch.next_obs, next.sample.action);
  const Eigen::RowVectorXd q1t = forward(nets.q1_t, xp).row(0);
  const Eigen::RowVectorXd q2t = forward(nets.q2_t, xp).row(0);
  const Eigen::RowVectorXd soft = q1t.cwiseMin(q2t) - nets.upsilon() * next.sample.log_prob;
  const Eigen::RowVectorXd not_done = Eigen::RowVectorXd::Ones(batch.cols()) - batch.done;
  const Eigen::RowVectorXd y = batch.reward + sac.gamma * not_done.cwiseProduct(soft);

  const Eigen::MatrixXd x = stack(batch.obs, batch.action);
  const double l1 = regress(nets.q1, nets.opt_q1, x, y, sac.lr);
  const double l2 = regress(nets.q2, nets.opt_q2, x, y, sac.lr);
  return 0.5 * (l1 + l2);
}

double update_cost_critics(LearnerNets& nets, const ReplayBuffer::Batch& batch,
                           const SacParams& sac, std::mt19937_64& rng) {
  const FreshSample next = sample_policy(nets.actor, batch.next_obs, rng, false);
  const Eigen::MatrixXd xp = stack(batch.next_obs, next.sample.action);
  const Eigen::RowVectorXd not_done = Eigen::RowVectorXd::Ones(batch.cols()) - batch.done;
  const Eigen::MatrixXd x = stack(batch.obs, batch.action);

  // Pessimistic (max) targets, no entropy term.
  const Eigen::RowVectorXd yo =
      batch.c_omega + sac.gamma * not_done.cwiseProduct(
                                      forward(nets.qc_omega1_t, xp)
                                          .row(0)
                                          .cwiseMax(forward(nets.qc_omega2_t, xp).row(0)));
  const Eigen::RowVectorXd yb =
      batch.c_beta + sac.gamma * not_done.cwiseProduct(
                                     forward(nets.qc_beta1_t, xp)
                                         .row(0)
                                         .cwiseMax(forward(nets.qc_beta2_t, xp).row(0)));

  const double lo1 = regress(nets.qc_omega1, nets.opt_qc_omega1, x, yo, sac.lr);
  const double lo2 = regress(nets.qc_omega2, nets.opt_qc_omega2, x, yo, sac.lr);
  const double lb1 = regress(nets.qc_beta1, nets.opt_qc_beta1, x, yb, sac.lr);
  const double lb2 = regress(nets.qc_beta2, nets.opt_qc_beta2, x, yb, sac.lr);
  return 0.25 * (lo1 + lo2 + lb1 + lb2);
}

double update_actor(LearnerNets& nets, const LagrangianState& lag,
                    const ReplayBuffer::Batch& batch, const SacParams& sac,
                    std::mt19937_64& rng) {
  const Eigen::Index cols = batch.cols();
  const auto b = static_cast<double>(cols);
  const double ups = nets.upsilon();

  FreshSample cur = sample_policy(nets.actor, batch.obs, rng, true);
  const Eigen::MatrixXd x = stack(batch.obs, cur.sample.action);
  const Eigen::Index act_dim = cur.sample.action.rows();

  // Reward path: -min over the online twins, gradient through the smaller.
  Tape tq1, tq2;
  const Eigen::RowVectorXd q1v = forward(nets.q1, x, &tq1).row(0);
  const Eigen::RowVectorXd q2v = forward(nets.q2, x, &tq2).row(0);
  const Eigen::RowVectorXd minq = q1v.cwiseMin(q2v);

  Eigen::MatrixXd dL_daction = Eigen::MatrixXd::Zero(act_dim, cols);
  Gradients scratch;  // critic parameter grads are computed and discarded
  {
    Eigen::MatrixXd og1 = Eigen::MatrixXd::Zero(1, cols);
    Eigen::MatrixXd og2 = Eigen::MatrixXd::Zero(1, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      (q1v[j] <= q2v[j] ? og1 : og2)(0, j) = -1.0 / b;
    }
    dL_daction += backward(nets.q1, tq1, og1, scratch).bottomRows(act_dim);
    dL_daction += backward(nets.q2, tq2, og2, scratch).bottomRows(act_dim);
  }

  // Constraint penalties: lambda_k * ReLU(max_j Qc - d_k); gradient flows
  // only where the dead-zone is inactive, through the larger twin.
  double penalty_value = 0.0;
  auto add_penalty = [&](Mlp& c1, Mlp& c2, double lambda, double threshold) {
    if (lambda == 0.0) return;
    Tape t1, t2;
    const Eigen::RowVectorXd v1 = forward(c1, x, &t1).row(0);
    const Eigen::RowVectorXd v2 = forward(c2, x, &t2).row(0);
    Eigen::MatrixXd og1 = Eigen::MatrixXd::Zero(1, cols);
    Eigen::MatrixXd og2 = Eigen::MatrixXd::Zero(1, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double vmax = std::max(v1[j], v2[j]);
      const double excess = vmax - threshold;
      if (excess > 0.0) {
        penalty_value += lambda * excess / b;
        (v1[j] >= v2[j] ? og1 : og2)(0, j) = lambda / b;
      }
    }
    dL_daction += backward(c1, t1, og1, scratch).bottomRows(act_dim);
    dL_daction += backward(c2, t2, og2, scratch).bottomRows(act_dim);
  };
  add_penalty(nets.qc_omega1, nets.qc_omega2, lag.lambda_omega, lag.d_omega);
  add_penalty(nets.qc_beta1, nets.qc_beta2, lag.lambda_beta, lag.d_beta);

  const double loss =
      (ups * cur.sample.log_prob.sum() - minq.sum()) / b + penalty_value;

  const Eigen::MatrixXd d_raw = policy_backward(cur.head, cur.sample, dL_daction, ups / b);
  Gradients actor_grads;
  backward(nets.actor, cur.tape, d_raw, actor_grads);
  adam_step(nets.actor, nets.opt_actor, actor_grads, sac.lr);
  return loss;
}

LambdaTelemetry update_lambda(const LearnerNets& nets, LagrangianState& lag,
                              const ReplayBuffer::Batch& batch, std::mt19937_64& rng) {
  const FreshSample cur = sample_policy(nets.actor, batch.obs, rng, false);
  const Eigen::MatrixXd x = stack(batch.obs, cur.sample.action);
  LambdaTelemetry tel;
  tel.c_bar_omega =
      forward(nets.qc_omega1, x).row(0).cwiseMax(forward(nets.qc_omega2, x).row(0)).mean();
  tel.c_bar_beta =
      forward(nets.qc_beta1, x).row(0).cwiseMax(forward(nets.qc_beta2, x).row(0)).mean();
  lag.lambda_omega = std::max(0.0, lag.lambda_omega + lag.lr_lambda * (tel.c_bar_omega - lag.d_omega));
  lag.lambda_beta = std::max(0.0, lag.lambda_beta + lag.lr_lambda * (tel.c_bar_beta - lag.d_beta));
  return tel;
}

void update_entropy(LearnerNets& nets, const ReplayBuffer::Batch& batch, const SacParams& sac,
                    std::mt19937_64& rng) {
  const FreshSample cur = sample_policy(nets.actor, batch.obs, rng, false);
  const double mean_logp = cur.sample.log_prob.mean();
  // J(ups) = E[-ups*(logpi + H_target)]; descend on log ups.
  const double grad_log_ups = -nets.upsilon() * (mean_logp + sac.target_entropy);
  nets.log_upsilon -= sac.lr_entropy * grad_log_ups;
}

void soft_update_targets(LearnerNets& nets, double polyak) {
  soft_update(nets.q1_t, nets.q1, polyak);
  soft_update(nets.q2_t, nets.q2, polyak);
  soft_update(nets.qc_omega1_t, nets.qc_omega1, polyak);
  soft_update(nets.qc_omega2_t, nets.qc_omega2, polyak);
  soft_update(nets.qc_beta1_t, nets.qc_beta1, polyak);
  soft_update(nets.qc_beta2_t, nets.qc_beta2, polyak);
}

Eigen::VectorXd act_deterministic(const Mlp& actor, const Eigen::VectorXd& obs) {
  const Eigen::MatrixXd raw = forward(actor, obs);
  const PolicyHead head = split_head(raw);
  return head.mean.array().tanh().matrix();
}

Eigen::VectorXd act_stochastic(const Mlp& actor, const Eigen::VectorXd& obs,
                               std::mt19937_64& rng) {
  const Eigen::MatrixXd raw = forward(actor, obs);
  const PolicyHead head = split_head(raw);
  const PolicySample s = policy_sample(head, gauss(head.mean.rows(), 1, rng));
  return s.action.col(0);
}

void LearnerConfig::validate() const {
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
  if (batch < 1) throw ConfigError("batch must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch)) {
    throw ConfigError("buffer capacity must be at least the batch size");
  }
  if (!(t_start < t_switch && t_switch <= t_max)) {
    throw ConfigError("schedule must satisfy t_start < t_switch <= t_max");
  }
  if (t_start < batch) throw ConfigError("t_start must be at least the batch size");
  if (eval_every < 1 || eval_episodes < 1 || final_eval_episodes < 1) {
    throw ConfigError("evaluation cadence and episode counts must be positive");
  }
  if (!(sac.gamma > 0.0 && sac.gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (!(sac.lr > 0.0) || !(sac.lr_entropy > 0.0) || !(lr_lambda > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(sac.polyak > 0.0 && sac.polyak <= 1.0)) throw ConfigError("polyak must be in (0, 1]");
  if (!(upsilon_init > 0.0)) throw ConfigError("upsilon_init must be positive");
  if (skip_budget < 0) throw ConfigError("skip_budget must be non-negative");
}

double EvalSummary::mean(double EvalEpisode::* field) const {
  if (episodes.empty()) return 0.0;
  double acc = 0.0;
  for (const EvalEpisode& e : episodes) acc += e.*field;
  return acc / static_cast<double>(episodes.size());
}

double EvalSummary::stddev(double EvalEpisode::* field) const {
  if (episodes.size() < 2) return 0.0;
  const double m = mean(field);
  double acc = 0.0;
  for (const EvalEpisode& e : episodes) {
    const double d = e.*field - m;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(episodes.size()));
}

EvalSummary evaluate(const Mlp& actor, RaceEnv& env, int episodes, std::uint64_t seed_base) {
  EvalSummary out;
  for (int k = 0; k < episodes; ++k) {
    ObservationGrid obs = env.reset(seed_base + static_cast<std::uint64_t>(k),
                                    Stage::kHighSpeedExploration);
    EvalEpisode ep;
    double cw_omega = 0.0;
    double cw_beta = 0.0;
    while (!env.episode_over()) {
      const Eigen::VectorXd a = act_deterministic(actor, obs.data);
      StepResult r = env.step(Eigen::Vector2d(a[0], a[1]));
      ep.return_sum += r.reward.r_total;
      cw_omega += r.costs.windowed_c_omega;
      cw_beta += r.costs.windowed_c_beta;
      ep.lap_time = r.info.lap_time;
      ep.lap_progress_pct = r.info.lap_progress_pct;
      if (r.info.lap_completed) ep.completed = true;
      obs = std::move(r.obs);
    }
    ep.steps = env.steps();
    ep.lap_avg_speed = env.cumulative_progress() / ep.lap_time;
    ep.omega_unsafe_per_s = env.unsafe().omega_entries / ep.lap_time;
    ep.beta_unsafe_per_s = env.unsafe().beta_entries / ep.lap_time;
    ep.mean_windowed_c_omega = cw_omega / static_cast<double>(ep.steps);
    ep.mean_windowed_c_beta = cw_beta / static_cast<double>(ep.steps);
    out.episodes.push_back(ep);
  }
  return out;
}

Trainer::Trainer(const TrackModel& track, const RacingLine& line, const VehicleParams& vehicle,
                 const GGVParams& ggv, const EnvelopeParams& envelope, const EnvConfig& env_cfg,
                 const LearnerConfig& cfg, std::uint64_t seed)
    : env_(track, line, vehicle, ggv, envelope, env_cfg),
      eval_env_(track, line, vehicle, ggv, envelope, env_cfg),
      cfg_(cfg),
      envelope_(envelope),
      rng_(seed),
      seed_(seed),
      nets_(LearnerNets::make(env_cfg.grid.obs_dim(), 2, cfg.hidden, cfg.upsilon_init, rng_)),
      buffer_(cfg.buffer_capacity, env_cfg.grid.obs_dim(), 2) {
  cfg_.validate();
  lag_.lr_lambda = cfg.lr_lambda;
  // The envelope thresholds bound the per-step windowed cost, but the dual
  // ascent compares them against the cost critics, which predict discounted
  // cost-to-go. Scale by the discounted-sum horizon so both sides match.
  const double horizon = 1.0 / (1.0 - cfg.sac.gamma);
  lag_.d_omega = envelope.d_omega * horizon;
  lag_.d_beta = envelope.d_beta * horizon;
}

TrainReport Trainer::train() {
  TrainReport report;
  report.seed = seed_;
  report.u_tar.reserve(static_cast<std::size_t>(cfg_.t_max));
  report.stage.reserve(static_cast<std::size_t>(cfg_.t_max));

  Stage stage = stage_of(0, cfg_.t_switch);
  ObservationGrid obs = env_.reset(rng_(), stage);
  double ep_return = 0.0;

  for (long long t = 0; t < cfg_.t_max; ++t) {
    stage = stage_of(t, cfg_.t_switch);
    env_.set_stage(stage);

    const Eigen::VectorXd a = act_stochastic(nets_.actor, obs.data, rng_);
    StepResult r = env_.step(Eigen::Vector2d(a[0], a[1]));
    const long long n = t + 1;  // transitions collected so far
    report.u_tar.push_back(r.info.u_tar);
    report.stage.push_back(static_cast<int>(stage));

    buffer_.push(obs.data, a, r.reward.r_total, r.obs.data, r.terminated,
                 r.costs.windowed_c_omega, r.costs.windowed_c_beta);
    ep_return += r.reward.r_total;
    obs = std::move(r.obs);

    if (env_.episode_over()) {
      EpisodeRow row;
      row.t_end = n;
      row.steps = env_.steps();
      row.return_sum = ep_return;
      row.progress_pct = r.info.lap_progress_pct;
      row.completed = r.info.lap_completed;
      row.terminated = r.terminated;
      report.episodes.push_back(row);
      obs = env_.reset(rng_(), stage);
      ep_return = 0.0;
    }

    if (n > cfg_.t_start && buffer_.size() >= static_cast<std::size_t>(cfg_.batch)) {
      const ReplayBuffer::Batch batch = buffer_.sample(cfg_.batch, rng_);
      UpdateRow row;
      row.t = t;
      if (!cfg_.ablate_dc) {
        row.cost_critic_loss = update_cost_critics(nets_, batch, cfg_.sac, rng_);
      }
      row.critic_loss = update_critics(nets_, batch, cfg_.sac, rng_);
      row.actor_loss = update_actor(nets_, lag_, batch, cfg_.sac, rng_);
      if (!cfg_.ablate_dc) {
        const LambdaTelemetry tel = update_lambda(nets_, lag_, batch, rng_);
        row.c_bar_omega = tel.c_bar_omega;
        row.c_bar_beta = tel.c_bar_beta;
      }
      update_entropy(nets_, batch, cfg_.sac, rng_);
      soft_update(nets_.q1_t, nets_.q1, cfg_.sac.polyak);
      soft_update(nets_.q2_t, nets_.q2, cfg_.sac.polyak);
      if (!cfg_.ablate_dc) {
        soft_update(nets_.qc_omega1_t, nets_.qc_omega1, cfg_.sac.polyak);
        soft_update(nets_.qc_omega2_t, nets_.qc_omega2, cfg_.sac.polyak);
        soft_update(nets_.qc_beta1_t, nets_.qc_beta1, cfg_.sac.polyak);
        soft_update(nets_.qc_beta2_t, nets_.qc_beta2, cfg_.sac.polyak);
      }
      row.lambda_omega = lag_.lambda_omega;
      row.lambda_beta = lag_.lambda_beta;
      row.upsilon = nets_.upsilon();
      report.updates.push_back(row);

      if (nets_.total_skipped() + buffer_.rejected() > cfg_.skip_budget) {
        throw TrainingDivergedError(
            "non-finite events exceeded budget: " + std::to_string(nets_.total_skipped()) +
            " skipped updates, " + std::to_string(buffer_.rejected()) + " rejected transitions");
      }
    }

    if (n % cfg_.eval_every == 0 && n < cfg_.t_max) {
      EvalSummary ev = evaluate(nets_.actor, eval_env_, cfg_.eval_episodes, 1000);
      ev.t = n;
      report.evals.push_back(ev);
    }
  }

  report.final_eval = evaluate(nets_.actor, eval_env_, cfg_.final_eval_episodes, 2000);
  report.final_eval.t = cfg_.t_max;
  report.evals.push_back(report.final_eval);
  report.steps = cfg_.t_max;
  report.skipped_updates = nets_.total_skipped();
  report.rejected_transitions = buffer_.rejected();
  return report;
}

}  // namespace apexrl
