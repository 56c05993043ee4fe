#pragma once

#include <cstdint>
#include <random>

#include "apexrl/grid.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/safety.hpp"
#include "apexrl/track.hpp"
#include "apexrl/vehicle.hpp"

namespace apexrl {

enum class Stage {
  kTrajectoryGuidance = 1,   // track the racing-line reference speed
  kHighSpeedExploration = 2  // target the absolute speed cap
};

// Stage 1 strictly before t_switch, stage 2 from t_switch on.
Stage stage_of(long long t, long long t_switch);

struct RewardBands {
  double u_h1 = 30.0;  // high-speed band lower edge, m/s
  double u_h2 = 60.0;  // high-speed band upper edge
  double u_l1 = 0.0;   // low-speed band lower edge (kept for config surface)
  double u_l2 = 5.0;   // low-speed penalty active below this
};

struct RewardWeights {
  double track = 1.0;
  double hs = 0.5;  // applied in stage 2 only
  double ls = 0.3;
  double lap = 1.0;
  double mcrl = 1.0;
  double ts = 0.7;
  double h = 0.5;
};

// Every component normalized into [-1, 1]; r_total is the configured
// weighted sum (high-speed term active only in stage 2, guidance terms
// dropped under the trajectory-guidance ablation).
struct RewardBreakdown {
  double r_track = 0.0;
  double r_hs = 0.0;
  double r_ls = 0.0;
  double r_lap = 0.0;
  double r_mcrl = 0.0;
  double r_ts = 0.0;
  double r_h = 0.0;
  double r_total = 0.0;
};

struct EnvConfig {
  GridConfig grid;
  RewardBands bands;
  RewardWeights weights;
  double dt = 0.02;
  int max_episode_steps = 6000;
  double reset_jitter = 2.0;  // +/- meters along s at reset; 0 disables
  double reset_u = 15.0;      // initial speed ceiling
  double k_preview = 0.5;     // lookahead horizon, seconds
  double L_min = 5.0;
  double L_max = 40.0;
  bool strict_paper_formulas = false;  // keep the raw printed r_ls / r_TS forms
  bool ablate_tg = false;              // "w/o TG": no line channel/guidance rewards,
                                       // u_tar = u_cap in both stages

  void validate() const;
};

struct StepInfo {
  double lap_progress_pct = 0.0;
  double s = 0.0;
  double lap_time = 0.0;  // seconds since reset
  bool lap_completed = false;
  double u_tar = 0.0;  // target speed used by r_TS this step
};

struct StepResult {
  ObservationGrid obs;
  RewardBreakdown reward;
  SafetyCosts costs;
  bool terminated = false;  // off-track or integration blowup
  bool truncated = false;   // step budget exhausted
  StepInfo info;
};

// Guidance quantities needed by the shaped rewards, resolved once per step.
struct GuidanceQuery {
  double l = 0.0;      // unsigned lateral distance to the racing line
  double u_tar = 0.0;  // stage-dependent target speed
  double phi_tar = 0.0;
};

RewardBreakdown compute_rewards(const VehicleState& state, bool on_track, bool lap_completed,
                                const GuidanceQuery& guide, Stage stage, const EnvConfig& cfg);

// The racing MDP: bicycle-model plant on a closed track with grid
// observations, shaped rewards, CBF safety costs, and lap accounting. One
// instance is single-owner mutable state; track and line are shared
// read-only.
class RaceEnv {
 public:
  RaceEnv(const TrackModel& track, const RacingLine& line, const VehicleParams& vehicle,
          const GGVParams& ggv, const EnvelopeParams& envelope, const EnvConfig& cfg);

  ObservationGrid reset(std::uint64_t seed, Stage stage);
  StepResult step(const Eigen::Vector2d& action_norm);

  Control scale_action(const Eigen::Vector2d& action_norm) const;
  GuidanceQuery guidance(const VehicleState& state, double s_now) const;

  void set_stage(Stage stage) { stage_ = stage; }
  Stage stage() const { return stage_; }
  const VehicleState& state() const { return state_; }
  const TrackModel& track() const { return *track_; }
  const RacingLine& line() const { return *line_; }
  const EnvConfig& config() const { return cfg_; }
  const UnsafeCounter& unsafe() const { return unsafe_; }
  bool episode_over() const { return finished_; }
  double cumulative_progress() const { return progress_; }
  int steps() const { return steps_; }

 private:
  ObservationGrid observe() const;

  const TrackModel* track_;
  const RacingLine* line_;
  VehicleParams vehicle_;
  GGVParams ggv_;
  EnvelopeParams envelope_;
  EnvConfig cfg_;

  VehicleState state_;
  Stage stage_ = Stage::kTrajectoryGuidance;
  std::mt19937_64 rng_{0};
  CostWindow window_;
  UnsafeCounter unsafe_;
  BarrierValues prev_h_;
  std::size_t track_hint_ = static_cast<std::size_t>(-1);
  mutable std::size_t line_hint_ = static_cast<std::size_t>(-1);
  double s_prev_ = 0.0;
  double progress_ = 0.0;
  int steps_ = 0;
  bool finished_ = true;
  bool lap_done_ = false;
};

}  // namespace apexrl
