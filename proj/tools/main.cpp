// Command-line front end: track generation, racing-line solving, rollouts,
// training, evaluation, and plot-data export, all driven by one JSON config.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apexrl/checkpoint.hpp"
#include "apexrl/config.hpp"
#include "apexrl/controller.hpp"
#include "apexrl/env.hpp"
#include "apexrl/errors.hpp"
#include "apexrl/learner.hpp"
#include "apexrl/metrics.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/runio.hpp"
#include "apexrl/trackgen.hpp"

namespace {

using namespace apexrl;

struct CliArgs {
  std::string config_path;
  std::string out_dir = "run";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string checkpoint_path;
  int stage = 2;
  int episodes = 0;  // 0: use the config's final_eval_episodes
};

std::string dir_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

// Track and racing line are built in place so internal pointers stay valid.
struct World {
  TrackModel track;
  RacingLine line;
};

void build_world(const ExperimentConfig& cfg, const std::string& base_dir, World& w) {
  w.track = cfg.build_track_model(base_dir);
  w.line = solve_mcrl(w.track, cfg.vehicle.w_veh, cfg.raceline.epsilon, cfg.raceline.max_iters);
  speed_profile(w.line, cfg.ggv);
}

TrackRows generate_rows(const ExperimentConfig& cfg) {
  const TrackSourceConfig& t = cfg.track;
  if (t.kind == "circle") return gen_circle(t.radius, t.half_width, cfg.vehicle.w_veh, t.spacing);
  if (t.kind == "stadium") {
    return gen_stadium(t.straight, t.radius, t.half_width, cfg.vehicle.w_veh, t.spacing);
  }
  if (t.kind == "s_curve") {
    return gen_s_curve(t.radius, t.half_width, cfg.vehicle.w_veh, t.spacing);
  }
  throw ConfigError("gen-track: track.kind must be a synthetic generator "
                    "(circle, stadium, s_curve), not \"" + t.kind + "\"");
}

int run_gen_track(const ExperimentConfig& cfg, const CliArgs& args) {
  const TrackRows rows = generate_rows(cfg);
  ensure_dir(args.out_dir);
  const std::string path = args.out_dir + "/track.csv";
  write_track_csv(path, rows);
  const TrackModel model = load_track(path, cfg.track.spacing);
  std::cout << path << ": " << rows.points.size() << " rows, length " << fmt(model.total_length)
            << " m\n";
  return 0;
}

int run_raceline(const ExperimentConfig& cfg, const CliArgs& args) {
  World world;
  build_world(cfg, dir_of(args.config_path), world);
  ensure_dir(args.out_dir);
  write_raceline_csv(args.out_dir + "/raceline.csv", world.line);
  {
    CsvWriter log(args.out_dir + "/raceline_log.csv", {"iter", "objective"});
    for (std::size_t i = 0; i < world.line.objective_history.size(); ++i) {
      log.row({fmt(static_cast<long long>(i)), fmt(world.line.objective_history[i])});
    }
  }
  std::cout << "raceline: " << (world.line.converged ? "converged" : "max-iters") << " after "
            << world.line.iterations << " iterations, final kappa delta "
            << fmt(world.line.final_kappa_delta) << "\n";
  return world.line.converged ? 0 : 2;
}

nlohmann::json step_record(long long t, const VehicleState& st, const Eigen::Vector2d& action,
                           const StepResult& r) {
  return nlohmann::json{{"t", t},
                        {"s", r.info.s},
                        {"x", st.x},
                        {"y", st.y},
                        {"phi", st.phi},
                        {"u", st.u},
                        {"v", st.v},
                        {"omega", st.omega},
                        {"beta", st.beta},
                        {"a", action[0]},
                        {"delta", action[1]},
                        {"r_total", r.reward.r_total},
                        {"r_track", r.reward.r_track},
                        {"r_hs", r.reward.r_hs},
                        {"r_ls", r.reward.r_ls},
                        {"r_lap", r.reward.r_lap},
                        {"r_mcrl", r.reward.r_mcrl},
                        {"r_ts", r.reward.r_ts},
                        {"r_h", r.reward.r_h},
                        {"c_omega", r.costs.c_omega},
                        {"c_beta", r.costs.c_beta},
                        {"cw_omega", r.costs.windowed_c_omega},
                        {"cw_beta", r.costs.windowed_c_beta},
                        {"h_omega", r.costs.h_omega},
                        {"h_beta1", r.costs.h_beta1},
                        {"h_beta2", r.costs.h_beta2},
                        {"u_tar", r.info.u_tar},
                        {"lap_progress_pct", r.info.lap_progress_pct},
                        {"terminated", r.terminated},
                        {"truncated", r.truncated}};
}

int run_simulate(const ExperimentConfig& cfg, const CliArgs& args) {
  World world;
  build_world(cfg, dir_of(args.config_path), world);
  RaceEnv env(world.track, world.line, cfg.vehicle, cfg.ggv, cfg.envelope, cfg.env);
  const Stage stage = args.stage == 1 ? Stage::kTrajectoryGuidance : Stage::kHighSpeedExploration;

  ensure_dir(args.out_dir);
  std::ofstream log(args.out_dir + "/steps.jsonl", std::ios::binary);
  if (!log) throw ConfigError("cannot open " + args.out_dir + "/steps.jsonl for writing");

  ObservationGrid obs = env.reset(cfg.seed, stage);
  long long t = 0;
  if (!args.checkpoint_path.empty()) {
    const Checkpoint ck = load_checkpoint(args.checkpoint_path);
    if (ck.nets.obs_dim() != cfg.env.grid.obs_dim()) {
      throw ConfigError("checkpoint observation size " + fmt(ck.nets.obs_dim()) +
                        " does not match the configured grid (" + fmt(cfg.env.grid.obs_dim()) +
                        ")");
    }
    while (!env.episode_over()) {
      const Eigen::VectorXd a = act_deterministic(ck.nets.actor, obs.data);
      const Eigen::Vector2d action(a[0], a[1]);
      StepResult r = env.step(action);
      log << step_record(t++, env.state(), action, r).dump() << '\n';
      obs = std::move(r.obs);
    }
  } else {
    LineFollowController ctrl(world.line, cfg.vehicle);
    while (!env.episode_over()) {
      const Eigen::Vector2d action = ctrl.act(env.state());
      StepResult r = env.step(action);
      log << step_record(t++, env.state(), action, r).dump() << '\n';
      obs = std::move(r.obs);
    }
  }
  std::cout << "simulate: " << t << " steps, progress " << fmt(env.cumulative_progress())
            << " m\n";
  return 0;
}

int run_train(const ExperimentConfig& cfg, const CliArgs& args) {
  World world;
  build_world(cfg, dir_of(args.config_path), world);
  ensure_dir(args.out_dir);
  write_file(args.out_dir + "/config.json", serialize_config(cfg));

  Trainer trainer(world.track, world.line, cfg.vehicle, cfg.ggv, cfg.envelope, cfg.env,
                  cfg.learner, cfg.seed);
  const TrainReport report = trainer.train();
  write_report_json(args.out_dir + "/report.json", report);
  save_checkpoint(args.out_dir + "/checkpoint.json", trainer.nets(), trainer.lagrangian());
  export_report_csvs(args.out_dir, report);

  const EvalSummary& fin = report.final_eval;
  std::cout << "train: " << report.steps << " steps, final eval progress "
            << fmt(fin.mean(&EvalEpisode::lap_progress_pct)) << "%, lap speed "
            << fmt(fin.mean(&EvalEpisode::lap_avg_speed)) << " m/s\n";
  return 0;
}

int run_eval(const ExperimentConfig& cfg, const CliArgs& args) {
  if (args.checkpoint_path.empty()) throw ConfigError("eval: --checkpoint is required");
  World world;
  build_world(cfg, dir_of(args.config_path), world);
  const Checkpoint ck = load_checkpoint(args.checkpoint_path);
  if (ck.nets.obs_dim() != cfg.env.grid.obs_dim()) {
    throw ConfigError("checkpoint observation size " + fmt(ck.nets.obs_dim()) +
                      " does not match the configured grid (" + fmt(cfg.env.grid.obs_dim()) + ")");
  }
  RaceEnv env(world.track, world.line, cfg.vehicle, cfg.ggv, cfg.envelope, cfg.env);
  const int episodes = args.episodes > 0 ? args.episodes : cfg.learner.final_eval_episodes;
  EvalSummary summary = evaluate(ck.nets.actor, env, episodes, 2000);

  ensure_dir(args.out_dir);
  TrainReport stub;  // reuse the eval-episode CSV writer
  stub.evals.push_back(summary);
  {
    CsvWriter w(args.out_dir + "/eval_episodes.csv",
                {"episode", "completed", "lap_time_s", "lap_avg_speed_mps", "omega_unsafe_per_s",
                 "beta_unsafe_per_s", "lap_progress_pct"});
    for (std::size_t k = 0; k < summary.episodes.size(); ++k) {
      const EvalEpisode& e = summary.episodes[k];
      w.row({fmt(static_cast<long long>(k)), e.completed ? "1" : "0",
             e.completed ? fmt(e.lap_time) : "", fmt(e.lap_avg_speed), fmt(e.omega_unsafe_per_s),
             fmt(e.beta_unsafe_per_s), fmt(e.lap_progress_pct)});
    }
  }
  nlohmann::json j;
  j["episodes"] = episodes;
  j["mean_lap_progress_pct"] = summary.mean(&EvalEpisode::lap_progress_pct);
  j["mean_lap_avg_speed"] = summary.mean(&EvalEpisode::lap_avg_speed);
  j["mean_omega_unsafe_per_s"] = summary.mean(&EvalEpisode::omega_unsafe_per_s);
  j["mean_beta_unsafe_per_s"] = summary.mean(&EvalEpisode::beta_unsafe_per_s);
  j["mean_return"] = summary.mean(&EvalEpisode::return_sum);
  write_file(args.out_dir + "/eval.json", j.dump(2) + "\n");
  std::cout << "eval: " << episodes << " episodes, mean progress "
            << fmt(summary.mean(&EvalEpisode::lap_progress_pct)) << "%\n";
  return 0;
}

int run_export_plots(const CliArgs& args) {
  const int warnings = export_plots(args.out_dir);
  if (warnings > 0) {
    std::cout << "export-plots: " << warnings << " warning(s), see " << args.out_dir
              << "/warnings.txt\n";
  } else {
    std::cout << "export-plots: all artifacts written to " << args.out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"apexrl: racing-line guided, constraint-aware RL for track driving"};
  app.require_subcommand(1);

  CliArgs args;
  auto add_common = [&args](CLI::App* sub, bool config_required) {
    sub->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required(config_required);
    sub->add_option("--out", args.out_dir, "output directory (default: run)");
    sub->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
  };

  CLI::App* gen = app.add_subcommand("gen-track", "write the configured synthetic track as CSV");
  add_common(gen, true);
  CLI::App* rl = app.add_subcommand("raceline", "solve the racing line and speed profile");
  add_common(rl, true);
  CLI::App* sim = app.add_subcommand("simulate", "roll one episode and log every step");
  add_common(sim, true);
  sim->add_option("--checkpoint", args.checkpoint_path,
                  "drive with a trained policy instead of the scripted controller");
  sim->add_option("--stage", args.stage, "reward stage (1 or 2, default 2)")
      ->check(CLI::Range(1, 2));
  CLI::App* train = app.add_subcommand("train", "run the full training loop");
  add_common(train, true);
  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(ev, true);
  ev->add_option("--checkpoint", args.checkpoint_path, "checkpoint to evaluate")->required();
  ev->add_option("--episodes", args.episodes, "episode count (default: config K)");
  CLI::App* plots = app.add_subcommand("export-plots", "derive plot CSVs from run artifacts");
  add_common(plots, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (plots->parsed()) return run_export_plots(args);

    ExperimentConfig cfg = load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;

    if (gen->parsed()) return run_gen_track(cfg, args);
    if (rl->parsed()) return run_raceline(cfg, args);
    if (sim->parsed()) return run_simulate(cfg, args);
    if (train->parsed()) return run_train(cfg, args);
    if (ev->parsed()) return run_eval(cfg, args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
