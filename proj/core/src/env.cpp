#include "apexrl/env.hpp"

#include <algorithm>
#include <cmath>

#include "apexrl/errors.hpp"

namespace apexrl {

Stage stage_of(long long t, long long t_switch) {
  return t < t_switch ? Stage::kTrajectoryGuidance : Stage::kHighSpeedExploration;
}

void EnvConfig::validate() const {
  grid.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (max_episode_steps < 1) throw ConfigError("max_episode_steps must be at least 1");
  if (reset_jitter < 0.0) throw ConfigError("reset_jitter must be non-negative");
  if (!(reset_u > 0.0)) throw ConfigError("reset_u must be positive");
  if (!(bands.u_h2 > bands.u_h1)) throw ConfigError("high-speed band needs u_h2 > u_h1");
  if (!(bands.u_l2 > 0.0)) throw ConfigError("u_l2 must be positive");
  if (!(L_max >= L_min && L_min > 0.0)) throw ConfigError("need 0 < L_min <= L_max");
  if (!(k_preview > 0.0)) throw ConfigError("k_preview must be positive");
}

RewardBreakdown compute_rewards(const VehicleState& state, bool on_track, bool lap_completed,
                                const GuidanceQuery& guide, Stage stage, const EnvConfig& cfg) {
  const RewardBands& b = cfg.bands;
  RewardBreakdown r;
  // +1 inside the corridor, -2 outside, rescaled into [-1, 1] by halving.
  r.r_track = (on_track ? 1.0 : -2.0) / 2.0;
  r.r_hs = std::clamp((state.u - b.u_h1) / (b.u_h2 - b.u_h1), 0.0, 1.0);
  if (state.u < b.u_l2) {
    // Corrected low-speed penalty: slower means more negative. The raw
    // printed form (1 - u/u_l2^2) is kept behind the strict flag.
    r.r_ls = cfg.strict_paper_formulas
                 ? std::clamp(1.0 - state.u / (b.u_l2 * b.u_l2), -1.0, 1.0)
                 : -(1.0 - state.u / b.u_l2);
  }
  r.r_lap = lap_completed ? 1.0 : 0.0;
  r.r_mcrl = 1.0 / (1.0 + guide.l * guide.l);
  const double speed_err = std::abs(state.u - guide.u_tar) / guide.u_tar;
  r.r_ts = cfg.strict_paper_formulas ? std::clamp(speed_err, 0.0, 1.0)
                                     : std::clamp(-speed_err, -1.0, 0.0);
  const double dphi = wrap_angle(state.phi - guide.phi_tar);
  r.r_h = 1.0 / (1.0 + dphi * dphi);

  const RewardWeights& w = cfg.weights;
  r.r_total = w.track * r.r_track + w.ls * r.r_ls + w.lap * r.r_lap + w.ts * r.r_ts;
  if (stage == Stage::kHighSpeedExploration) r.r_total += w.hs * r.r_hs;
  if (!cfg.ablate_tg) r.r_total += w.mcrl * r.r_mcrl + w.h * r.r_h;
  return r;
}

RaceEnv::RaceEnv(const TrackModel& track, const RacingLine& line, const VehicleParams& vehicle,
                 const GGVParams& ggv, const EnvelopeParams& envelope, const EnvConfig& cfg)
    : track_(&track),
      line_(&line),
      vehicle_(vehicle),
      ggv_(ggv),
      envelope_(envelope),
      cfg_(cfg),
      window_(envelope.window_len) {
  vehicle_.validate();
  ggv_.validate();
  envelope_.validate();
  cfg_.validate();
  if (line.records.empty() || line.records[0].u_ref <= 0.0) {
    throw ConfigError("RaceEnv needs a racing line with a populated speed profile");
  }
}

Control RaceEnv::scale_action(const Eigen::Vector2d& action_norm) const {
  Control c;
  c.a = std::clamp(action_norm[0], -1.0, 1.0) * vehicle_.a_max;
  c.delta = std::clamp(action_norm[1], -1.0, 1.0) * vehicle_.delta_max;
  return c;
}

GuidanceQuery RaceEnv::guidance(const VehicleState& state, double s_now) const {
  GuidanceQuery g;
  const LocateResult on_line = locate_line(*line_, Vec2(state.x, state.y), line_hint_);
  line_hint_ = on_line.index;
  g.l = std::abs(on_line.lateral_offset);
  const RacingLineRecord ahead = lookahead(*line_, s_now, state.u, cfg_.k_preview, cfg_.L_min,
                                           cfg_.L_max);
  const bool cap_target = cfg_.ablate_tg || stage_ == Stage::kHighSpeedExploration;
  g.u_tar = cap_target ? ggv_.u_cap : ahead.u_ref;
  g.phi_tar = ahead.phi;
  return g;
}

ObservationGrid RaceEnv::observe() const {
  return build_observation(state_, *track_, *line_, cfg_.grid, ggv_.u_cap, !cfg_.ablate_tg,
                           track_hint_);
}

ObservationGrid RaceEnv::reset(std::uint64_t seed, Stage stage) {
  rng_.seed(seed);
  stage_ = stage;

  double s0 = 0.0;
  if (cfg_.reset_jitter > 0.0) {
    std::uniform_real_distribution<double> jitter(-cfg_.reset_jitter, cfg_.reset_jitter);
    s0 = jitter(rng_);
    const double L = track_->total_length;
    s0 = std::fmod(s0 + L, L);
  }
  // Spawn on the racing line at s0, heading along it. The lookahead
  // interpolator with a zero preview window resolves the record at s0.
  const RacingLineRecord at = lookahead(*line_, s0, 0.0, 1.0, 0.0, 0.0);
  state_ = VehicleState{};
  state_.x = at.x;
  state_.y = at.y;
  state_.phi = at.phi;
  state_.u = std::max(std::min(cfg_.reset_u, at.u_ref), vehicle_.u_min_dyn);
  state_.v = 0.0;
  state_.omega = 0.0;
  state_.beta = 0.0;

  window_.reset();
  unsafe_.reset();
  track_hint_ = static_cast<std::size_t>(-1);
  line_hint_ = static_cast<std::size_t>(-1);
  const LocateResult loc = locate(*track_, Vec2(state_.x, state_.y));
  track_hint_ = loc.index;
  s_prev_ = loc.s;
  progress_ = 0.0;
  steps_ = 0;
  finished_ = false;
  lap_done_ = false;
  prev_h_ = barrier_values(state_, vehicle_, envelope_);
  unsafe_.update(prev_h_);
  return observe();
}

StepResult RaceEnv::step(const Eigen::Vector2d& action_norm) {
  if (finished_) throw ContractError("step() on a finished episode; call reset()");

  const Control control = scale_action(action_norm);
  StepResult out;
  bool blowup = false;
  try {
    state_ = step_rk4(state_, control, cfg_.dt, vehicle_);
  } catch (const IntegrationBlowupError&) {
    blowup = true;
  }
  // Keep the committed state inside the dynamics validity domain; episodes
  // start above the floor so this is a safety net, not a steady regime.
  if (!blowup && state_.u < vehicle_.u_min_dyn) {
    state_.u = vehicle_.u_min_dyn;
    state_.beta = std::atan(state_.v / state_.u);
  }
  ++steps_;

  const LocateResult loc = locate(*track_, Vec2(state_.x, state_.y), track_hint_);
  track_hint_ = loc.index;
  const double delta_s = progress_delta(*track_, s_prev_, loc.s);
  s_prev_ = loc.s;
  progress_ += delta_s;
  const bool on_track = !blowup && loc.lateral_offset >= -track_->w_left[loc.index] &&
                        loc.lateral_offset <= track_->w_right[loc.index];
  const bool lap_completed = !lap_done_ && progress_ >= track_->total_length;
  if (lap_completed) lap_done_ = true;

  const GuidanceQuery guide = guidance(state_, loc.s);
  out.reward = compute_rewards(state_, on_track, lap_completed, guide, stage_, cfg_);

  if (blowup) {
    // No valid post-step state: carry the previous barriers, zero new costs.
    out.costs = window_.update(prev_h_, 0.0, 0.0);
  } else {
    const BarrierValues h_now = barrier_values(state_, vehicle_, envelope_);
    const InstantCosts inst = cbf_costs(prev_h_, h_now, cfg_.dt, envelope_);
    out.costs = window_.update(h_now, inst.c_omega, inst.c_beta);
    unsafe_.update(h_now);
    prev_h_ = h_now;
  }

  out.terminated = blowup || !on_track;
  out.truncated = !out.terminated && steps_ >= cfg_.max_episode_steps && !lap_completed;
  out.info.lap_progress_pct =
      std::clamp(100.0 * progress_ / track_->total_length, 0.0, 100.0);
  out.info.s = loc.s;
  out.info.lap_time = steps_ * cfg_.dt;
  out.info.lap_completed = lap_completed;
  out.info.u_tar = guide.u_tar;
  finished_ = out.terminated || out.truncated || lap_completed;
  out.obs = observe();
  return out;
}

}  // namespace apexrl
