#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "apexrl/checkpoint.hpp"
#include "apexrl/config.hpp"
#include "apexrl/errors.hpp"
#include "apexrl/metrics.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/runio.hpp"
#include "apexrl/trackgen.hpp"

using namespace apexrl;

namespace {

std::string temp_dir(const char* name) {
  const std::string dir = std::string("/tmp/apexrl_harness_") + name;
  std::filesystem::remove_all(dir);
  return ensure_dir(dir);
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

TrainReport sample_report() {
  TrainReport r;
  r.seed = 42;
  r.steps = 4;
  r.u_tar = {18.0, 18.5, 70.0, 70.0};
  r.stage = {1, 1, 2, 2};

  UpdateRow u;
  u.t = 3;
  u.critic_loss = 0.25;
  u.cost_critic_loss = 0.125;
  u.actor_loss = -1.5;
  u.lambda_omega = 0.01;
  u.lambda_beta = 0.0;
  u.upsilon = 0.2;
  u.c_bar_omega = 0.04;
  u.c_bar_beta = 0.001;
  r.updates.push_back(u);

  EpisodeRow ep;
  ep.t_end = 4;
  ep.steps = 4;
  ep.return_sum = 3.25;
  ep.progress_pct = 12.5;
  ep.completed = false;
  ep.terminated = true;
  r.episodes.push_back(ep);

  EvalSummary ev;
  ev.t = 2;
  EvalEpisode done;
  done.completed = true;
  done.steps = 800;
  done.lap_time = 16.0;  // 320 m at a constant 20 m/s
  done.lap_avg_speed = 20.0;
  done.lap_progress_pct = 100.0;
  done.omega_unsafe_per_s = 0.0;
  done.beta_unsafe_per_s = 0.125;
  done.mean_windowed_c_omega = 0.02;
  done.mean_windowed_c_beta = 0.001;
  done.return_sum = 900.0;
  EvalEpisode dnf;
  dnf.completed = false;
  dnf.steps = 100;
  dnf.lap_time = 2.0;
  dnf.lap_avg_speed = 11.0;
  dnf.lap_progress_pct = 6.875;
  dnf.return_sum = -20.0;
  ev.episodes = {done, dnf};
  r.evals.push_back(ev);
  r.final_eval = ev;
  r.final_eval.t = 4;
  r.skipped_updates = 0;
  r.rejected_transitions = 1;
  return r;
}

}  // namespace

TEST_CASE("config: defaults parse from an empty object") {
  const ExperimentConfig cfg = parse_config("{}", "inline");
  CHECK(cfg.seed == 1);
  CHECK(cfg.track.kind == "stadium");
  CHECK(cfg.learner.batch == 256);
  CHECK(cfg.env.dt == 0.02);
  CHECK(!cfg.ablate_tg());
  CHECK(!cfg.ablate_dc());
}

TEST_CASE("config: serialize/parse round-trip is the identity") {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.track.kind = "circle";
  cfg.track.radius = 35.5;
  cfg.raceline.epsilon = 2e-4;
  cfg.vehicle.m = 810.0;
  cfg.ggv.u_cap = 55.0;
  cfg.envelope.d_omega = 0.04;
  cfg.env.dt = 0.01;
  cfg.env.grid.H = 24;
  cfg.env.reset_jitter = 0.0;
  cfg.env.ablate_tg = true;
  cfg.learner.ablate_dc = true;
  cfg.learner.hidden = {64, 32};
  cfg.learner.sac.gamma = 0.95;
  cfg.learner.t_max = 1000;
  cfg.learner.t_start = 300;
  cfg.learner.t_switch = 800;

  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config(text, "roundtrip");
  CHECK(serialize_config(back) == text);
  CHECK(back.seed == 7);
  CHECK(back.track.kind == "circle");
  CHECK(back.track.radius == 35.5);
  CHECK(back.env.grid.H == 24);
  CHECK(back.learner.hidden == std::vector<int>({64, 32}));
  CHECK(back.ablate_tg());
  CHECK(back.ablate_dc());

  // Ablation flags live at the top level of the file.
  CHECK(contains(text, "\"ablate_tg\""));
  CHECK(contains(text, "\"ablate_dc\""));
}

TEST_CASE("config: unknown keys and type mismatches name the field path") {
  try {
    parse_config(R"({"env": {"gird": {}}})", "inline");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "env.gird"));
  }
  try {
    parse_config(R"({"learner": {"batch": "many"}})", "inline");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "learner.batch"));
  }
  try {
    parse_config(R"({"env": {"grid": {"H": 16, "D": 2}}})", "inline");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "env.grid.D"));
  }
  CHECK_THROWS_AS(parse_config("not json", "inline"), ConfigError);
}

TEST_CASE("config: track building and csv resolution") {
  ExperimentConfig cfg;
  cfg.track.kind = "circle";
  cfg.track.radius = 20.0;
  cfg.track.spacing = 1.0;
  const TrackModel circle = cfg.build_track_model("");
  CHECK(circle.total_length == doctest::Approx(2 * 3.14159265358979 * 20).epsilon(5e-3));

  const std::string dir = temp_dir("cfg_csv");
  write_track_csv(dir + "/track.csv", gen_circle(15.0, 5.0));
  cfg.track.kind = "csv";
  cfg.track.file = "track.csv";
  const TrackModel from_csv = cfg.build_track_model(dir);
  CHECK(from_csv.total_length == doctest::Approx(2 * 3.14159265358979 * 15).epsilon(5e-3));

  // load_config rejects a config whose csv does not exist next to it.
  const std::string cfg_path = dir + "/exp.json";
  ExperimentConfig bad;
  bad.track.kind = "csv";
  bad.track.file = "missing.csv";
  write_file(cfg_path, serialize_config(bad));
  CHECK_THROWS_AS(load_config(cfg_path), ConfigError);

  ExperimentConfig good = bad;
  good.track.file = "track.csv";
  write_file(cfg_path, serialize_config(good));
  CHECK_NOTHROW(load_config(cfg_path));
}

TEST_CASE("config: validation failures surface as ConfigError") {
  ExperimentConfig cfg;
  cfg.track.kind = "hexagon";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.track.half_width = 0.9;  // narrower than the vehicle
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.raceline.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("checkpoint: bit-exact round-trip of the full learner state") {
  std::mt19937_64 rng(3);
  LearnerNets nets = LearnerNets::make(6, 2, {8, 8}, 0.37, rng);
  // Touch the optimizer state so moments are nonzero.
  Gradients g = Gradients::zeros_like(nets.q1);
  for (auto& m : g.dW) m.setConstant(0.125);
  for (auto& v : g.db) v.setConstant(-0.25);
  adam_step(nets.q1, nets.opt_q1, g, 1e-3);
  nets.log_upsilon = -0.7331;

  LagrangianState lag;
  lag.lambda_omega = 0.011;
  lag.lambda_beta = 0.0007;
  lag.lr_lambda = 3e-5;
  lag.d_omega = 0.04;
  lag.d_beta = 0.06;

  const std::string dir = temp_dir("ckpt");
  const std::string path = dir + "/checkpoint.json";
  save_checkpoint(path, nets, lag);
  const Checkpoint loaded = load_checkpoint(path);

  CHECK(loaded.nets.log_upsilon == nets.log_upsilon);
  CHECK(loaded.lag.lambda_omega == lag.lambda_omega);
  CHECK(loaded.lag.lambda_beta == lag.lambda_beta);
  CHECK(loaded.lag.lr_lambda == lag.lr_lambda);
  CHECK(loaded.lag.d_omega == lag.d_omega);
  CHECK(loaded.lag.d_beta == lag.d_beta);
  CHECK(loaded.nets.actor.widths == nets.actor.widths);
  for (std::size_t l = 0; l < nets.actor.n_layers(); ++l) {
    CHECK((loaded.nets.actor.W[l] - nets.actor.W[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.nets.qc_beta2_t.W[l] - nets.qc_beta2_t.W[l]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(loaded.nets.opt_q1.t == 1);
  CHECK((loaded.nets.opt_q1.mW[0] - nets.opt_q1.mW[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.nets.opt_q1.vb[1] - nets.opt_q1.vb[1]).cwiseAbs().maxCoeff() == 0.0);

  // Saving the loaded state reproduces the file byte for byte.
  const std::string again = dir + "/checkpoint2.json";
  save_checkpoint(again, loaded.nets, loaded.lag);
  CHECK(read_file(again) == read_file(path));
}

TEST_CASE("checkpoint: malformed files raise ParseError") {
  const std::string dir = temp_dir("ckpt_bad");
  write_file(dir + "/garbage.json", "{\"version\": 1, \"nets\": 3}\n");
  CHECK_THROWS_AS(load_checkpoint(dir + "/garbage.json"), ParseError);
  write_file(dir + "/vers.json", "{\"version\": 99}\n");
  CHECK_THROWS_AS(load_checkpoint(dir + "/vers.json"), ParseError);
  write_file(dir + "/notjson.json", "hello");
  CHECK_THROWS_AS(load_checkpoint(dir + "/notjson.json"), ParseError);
}

TEST_CASE("report json: round-trip and byte-stable rewrite") {
  const TrainReport r = sample_report();
  const std::string dir = temp_dir("report");
  const std::string path = dir + "/report.json";
  write_report_json(path, r);
  const TrainReport back = read_report_json(path);

  CHECK(back.seed == r.seed);
  CHECK(back.steps == r.steps);
  CHECK(back.u_tar == r.u_tar);
  CHECK(back.stage == r.stage);
  REQUIRE(back.updates.size() == 1);
  CHECK(back.updates[0].critic_loss == 0.25);
  CHECK(back.updates[0].lambda_omega == 0.01);
  REQUIRE(back.episodes.size() == 1);
  CHECK(back.episodes[0].terminated);
  REQUIRE(back.evals.size() == 1);
  REQUIRE(back.evals[0].episodes.size() == 2);
  CHECK(back.evals[0].episodes[0].lap_time == 16.0);
  CHECK(back.evals[0].episodes[1].completed == false);
  CHECK(back.final_eval.t == 4);
  CHECK(back.rejected_transitions == 1);

  const std::string path2 = dir + "/report2.json";
  write_report_json(path2, back);
  CHECK(read_file(path2) == read_file(path));
}

TEST_CASE("export_report_csvs: lap columns and blank cells") {
  const TrainReport r = sample_report();
  const std::string dir = temp_dir("csvs");
  export_report_csvs(dir, r);

  const std::string evals = read_file(dir + "/eval_episodes.csv");
  CHECK(contains(evals,
                 "t,episode,completed,lap_time_s,lap_avg_speed_mps,omega_unsafe_per_s,"
                 "beta_unsafe_per_s,lap_progress_pct,mean_windowed_c_omega,"
                 "mean_windowed_c_beta,return_sum"));
  // The completed lap: 320 m at 20 m/s -> 16 s.
  CHECK(contains(evals, "2,0,1,16,20,0,0.125,100,0.02,0.001,900"));
  // The DNF leaves the lap-time cell empty.
  CHECK(contains(evals, "2,1,0,,11,"));

  const std::string curves = read_file(dir + "/training_curves.csv");
  CHECK(contains(curves, "t,lap_reward,lap_time_s,lap_avg_speed_mps,lap_progress_pct"));
  // Mean lap time over completed episodes only: 16.
  CHECK(contains(curves, ",16,"));

  const std::string steps = read_file(dir + "/train_steps.csv");
  CHECK(contains(steps, "t,stage,u_tar"));
  CHECK(contains(steps, "1,1,18"));
  CHECK(contains(steps, "3,2,70"));

  CHECK(contains(read_file(dir + "/episodes.csv"), "t_end,steps,return_sum"));
  CHECK(contains(read_file(dir + "/updates.csv"), "critic_loss"));
}

TEST_CASE("export_step_csvs: selects plot columns and skips bad lines") {
  const std::string dir = temp_dir("steps");
  std::string lines;
  lines +=
      R"({"s": 1.5, "u": 12.0, "u_tar": 14.0, "beta": 0.01, "omega": 0.2, "h_omega": 0.6, "h_beta1": 0.2, "h_beta2": 0.18})"
      "\n";
  lines += "this line is not json\n";
  lines +=
      R"({"s": 2.5, "u": 12.5, "u_tar": 14.0, "beta": 0.015, "omega": 0.25, "h_omega": 0.55, "h_beta1": 0.19, "h_beta2": 0.17})"
      "\n";
  write_file(dir + "/steps.jsonl", lines);

  CHECK(export_step_csvs(dir, dir + "/steps.jsonl"));
  const std::string speed = read_file(dir + "/speed_vs_s.csv");
  CHECK(contains(speed, "s,u,u_tar"));
  CHECK(contains(speed, "1.5,12,14"));
  CHECK(contains(speed, "2.5,12.5,14"));
  const std::string bo = read_file(dir + "/beta_omega.csv");
  CHECK(contains(bo, "beta,omega,h_omega,h_beta1,h_beta2"));
  CHECK(contains(bo, "0.015,0.25,0.55,0.19,0.17"));

  write_file(dir + "/empty.jsonl", "nope\n");
  CHECK(!export_step_csvs(dir, dir + "/empty.jsonl"));
}

TEST_CASE("export_plots: missing inputs land in the warning manifest") {
  const std::string dir = temp_dir("plots_empty");
  CHECK(export_plots(dir) == 2);
  const std::string warn = read_file(dir + "/warnings.txt");
  CHECK(contains(warn, "report.json"));
  CHECK(contains(warn, "steps.jsonl"));

  const std::string dir2 = temp_dir("plots_report");
  write_report_json(dir2 + "/report.json", sample_report());
  CHECK(export_plots(dir2) == 1);
  CHECK(std::filesystem::exists(dir2 + "/eval_episodes.csv"));
}

namespace {

struct HarnessWorld {
  TrackModel track;
  RacingLine line;
  VehicleParams vehicle;
  GGVParams ggv;
  EnvelopeParams envelope;
};

const HarnessWorld& harness_world() {
  static const HarnessWorld w = [] {
    HarnessWorld out;
    const TrackRows rows = gen_circle(12.0, 5.0);
    out.track = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
    out.line = solve_mcrl(out.track, out.vehicle.w_veh);
    speed_profile(out.line, out.ggv);
    return out;
  }();
  return w;
}

LearnerConfig tiny_learn_cfg() {
  LearnerConfig cfg;
  cfg.hidden = {16};
  cfg.buffer_capacity = 128;
  cfg.batch = 8;
  cfg.t_max = 60;
  cfg.t_start = 8;
  cfg.t_switch = 40;
  cfg.eval_every = 30;
  cfg.eval_episodes = 1;
  cfg.final_eval_episodes = 1;
  return cfg;
}

EnvConfig tiny_env_cfg_h() {
  EnvConfig cfg;
  cfg.grid.H = 4;
  cfg.grid.W = 4;
  cfg.grid.cell_size = 4.0;
  cfg.max_episode_steps = 40;
  return cfg;
}

}  // namespace

TEST_CASE("determinism: identical seeds give byte-identical artifacts") {
  const HarnessWorld& w = harness_world();
  const std::string dir = temp_dir("determinism");

  for (int run = 0; run < 2; ++run) {
    Trainer trainer(w.track, w.line, w.vehicle, w.ggv, w.envelope, tiny_env_cfg_h(),
                    tiny_learn_cfg(), 123);
    const TrainReport report = trainer.train();
    const std::string tag = run == 0 ? "a" : "b";
    write_report_json(dir + "/report_" + tag + ".json", report);
    save_checkpoint(dir + "/ckpt_" + tag + ".json", trainer.nets(), trainer.lagrangian());
  }
  CHECK(read_file(dir + "/report_a.json") == read_file(dir + "/report_b.json"));
  CHECK(read_file(dir + "/ckpt_a.json") == read_file(dir + "/ckpt_b.json"));

  // A different seed must not reproduce the same run.
  Trainer other(w.track, w.line, w.vehicle, w.ggv, w.envelope, tiny_env_cfg_h(),
                tiny_learn_cfg(), 124);
  const TrainReport report = other.train();
  write_report_json(dir + "/report_c.json", report);
  CHECK(read_file(dir + "/report_c.json") != read_file(dir + "/report_a.json"));
}

TEST_CASE("eval scoping: the dynamics-constraint ablation leaves rollouts alone") {
  const HarnessWorld& w = harness_world();
  const EnvConfig env_cfg = tiny_env_cfg_h();
  std::mt19937_64 rng(5);
  LearnerNets nets = LearnerNets::make(env_cfg.grid.obs_dim(), 2, {16}, 0.2, rng);

  // ablate_dc is a learner-side switch; the evaluation environment built from
  // an otherwise identical config must behave identically.
  RaceEnv full(w.track, w.line, w.vehicle, w.ggv, w.envelope, env_cfg);
  RaceEnv ablated(w.track, w.line, w.vehicle, w.ggv, w.envelope, env_cfg);
  const EvalSummary a = evaluate(nets.actor, full, 2, 2000);
  const EvalSummary b = evaluate(nets.actor, ablated, 2, 2000);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (std::size_t k = 0; k < a.episodes.size(); ++k) {
    CHECK(a.episodes[k].steps == b.episodes[k].steps);
    CHECK(a.episodes[k].return_sum == b.episodes[k].return_sum);
    CHECK(a.episodes[k].lap_avg_speed == b.episodes[k].lap_avg_speed);
    CHECK(a.episodes[k].mean_windowed_c_beta == b.episodes[k].mean_windowed_c_beta);
  }
}
