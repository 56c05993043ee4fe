#include "apexrl/config.hpp"

#include <filesystem>
#include <set>
#include <utility>

#include <json.hpp>

#include "apexrl/errors.hpp"
#include "apexrl/runio.hpp"

namespace apexrl {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

// One JSON object plus its field path; getters mark keys as consumed so
// finish() can flag typos. Absent keys leave the output untouched.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  void get(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void get(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void get(const char* key, long long& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<long long>();
    }
  }

  // Also serves std::size_t fields (same type on this platform set).
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() ||
          (!v->is_number_unsigned() && v->get<long long>() < 0)) {
        fail(at(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void get(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void get(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void get(const char* key, std::vector<int>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of integers");
      std::vector<int> tmp;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_number_integer()) {
          fail(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
        }
        tmp.push_back(e.get<int>());
      }
      out = std::move(tmp);
    }
  }

  // Nested object; returns nullptr when absent.
  const json* child(const char* key) {
    const json* v = take(key);
    if (v && !v->is_object()) fail(at(key), "expected an object");
    return v;
  }

  void finish() const {
    for (const auto& item : j_->items()) {
      if (!seen_.count(item.key())) fail(at(item.key().c_str()), "unknown key");
    }
  }

 private:
  std::string at(const char* key) const { return path_ + "." + key; }

  const json* take(const char* key) {
    seen_.insert(key);
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_track(const json& j, const std::string& path, TrackSourceConfig& out) {
  Obj o(j, path);
  o.get("kind", out.kind);
  o.get("file", out.file);
  o.get("radius", out.radius);
  o.get("straight", out.straight);
  o.get("half_width", out.half_width);
  o.get("spacing", out.spacing);
  o.finish();
}

void parse_raceline(const json& j, const std::string& path, RacelineSolverConfig& out) {
  Obj o(j, path);
  o.get("epsilon", out.epsilon);
  o.get("max_iters", out.max_iters);
  o.finish();
}

void parse_vehicle(const json& j, const std::string& path, VehicleParams& out) {
  Obj o(j, path);
  o.get("m", out.m);
  o.get("I_z", out.I_z);
  o.get("l_f", out.l_f);
  o.get("l_r", out.l_r);
  o.get("C_alpha_f", out.C_alpha_f);
  o.get("C_alpha_r", out.C_alpha_r);
  o.get("w_veh", out.w_veh);
  o.get("length", out.length);
  o.get("a_max", out.a_max);
  o.get("delta_max", out.delta_max);
  o.get("u_min_dyn", out.u_min_dyn);
  o.finish();
}

void parse_ggv(const json& j, const std::string& path, GGVParams& out) {
  Obj o(j, path);
  o.get("mu", out.mu);
  o.get("g", out.g);
  o.get("a_acc_max", out.a_acc_max);
  o.get("a_brk_max", out.a_brk_max);
  o.get("u_cap", out.u_cap);
  o.finish();
}

void parse_envelope(const json& j, const std::string& path, EnvelopeParams& out) {
  Obj o(j, path);
  o.get("mu", out.mu);
  o.get("g", out.g);
  o.get("alpha_cbf", out.alpha_cbf);
  o.get("window_len", out.window_len);
  o.get("d_omega", out.d_omega);
  o.get("d_beta", out.d_beta);
  o.finish();
}

void parse_env(const json& j, const std::string& path, EnvConfig& out) {
  Obj o(j, path);
  if (const json* g = o.child("grid")) {
    Obj og(*g, path + ".grid");
    og.get("H", out.grid.H);
    og.get("W", out.grid.W);
    og.get("cell_size", out.grid.cell_size);
    og.finish();
  }
  if (const json* b = o.child("bands")) {
    Obj ob(*b, path + ".bands");
    ob.get("u_h1", out.bands.u_h1);
    ob.get("u_h2", out.bands.u_h2);
    ob.get("u_l1", out.bands.u_l1);
    ob.get("u_l2", out.bands.u_l2);
    ob.finish();
  }
  if (const json* w = o.child("weights")) {
    Obj ow(*w, path + ".weights");
    ow.get("track", out.weights.track);
    ow.get("hs", out.weights.hs);
    ow.get("ls", out.weights.ls);
    ow.get("lap", out.weights.lap);
    ow.get("mcrl", out.weights.mcrl);
    ow.get("ts", out.weights.ts);
    ow.get("h", out.weights.h);
    ow.finish();
  }
  o.get("dt", out.dt);
  o.get("max_episode_steps", out.max_episode_steps);
  o.get("reset_jitter", out.reset_jitter);
  o.get("reset_u", out.reset_u);
  o.get("k_preview", out.k_preview);
  o.get("L_min", out.L_min);
  o.get("L_max", out.L_max);
  o.get("strict_paper_formulas", out.strict_paper_formulas);
  o.finish();
}

void parse_learner(const json& j, const std::string& path, LearnerConfig& out) {
  Obj o(j, path);
  o.get("hidden", out.hidden);
  o.get("buffer_capacity", out.buffer_capacity);
  o.get("batch", out.batch);
  o.get("gamma", out.sac.gamma);
  o.get("lr", out.sac.lr);
  o.get("lr_entropy", out.sac.lr_entropy);
  o.get("polyak", out.sac.polyak);
  o.get("target_entropy", out.sac.target_entropy);
  o.get("lr_lambda", out.lr_lambda);
  o.get("upsilon_init", out.upsilon_init);
  o.get("t_max", out.t_max);
  o.get("t_start", out.t_start);
  o.get("t_switch", out.t_switch);
  o.get("eval_every", out.eval_every);
  o.get("eval_episodes", out.eval_episodes);
  o.get("final_eval_episodes", out.final_eval_episodes);
  o.get("skip_budget", out.skip_budget);
  o.finish();
}

}  // namespace

void TrackSourceConfig::validate(double w_veh) const {
  if (kind == "csv") {
    if (file.empty()) throw ConfigError("track.file: required when track.kind is \"csv\"");
  } else if (kind == "circle" || kind == "stadium" || kind == "s_curve") {
    if (!(radius > 10.0)) throw ConfigError("track.radius: must exceed 10 m");
    if (!(2.0 * half_width > w_veh)) {
      throw ConfigError("track.half_width: corridor narrower than the vehicle");
    }
    if (kind == "stadium" && !(straight > 0.0)) {
      throw ConfigError("track.straight: must be positive");
    }
  } else {
    throw ConfigError("track.kind: expected circle, stadium, s_curve, or csv");
  }
  if (!(spacing > 0.0)) throw ConfigError("track.spacing: must be positive");
}

void RacelineSolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("raceline.epsilon: must be positive");
  if (max_iters < 1) throw ConfigError("raceline.max_iters: must be positive");
}

void ExperimentConfig::validate() const {
  track.validate(vehicle.w_veh);
  raceline.validate();
  vehicle.validate();
  ggv.validate();
  envelope.validate();
  env.validate();
  learner.validate();
}

TrackModel ExperimentConfig::build_track_model(const std::string& base_dir) const {
  track.validate(vehicle.w_veh);
  if (track.kind == "csv") {
    std::filesystem::path p(track.file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return load_track(p.string(), track.spacing);
  }
  TrackRows rows;
  if (track.kind == "circle") {
    rows = gen_circle(track.radius, track.half_width, vehicle.w_veh, track.spacing);
  } else if (track.kind == "stadium") {
    rows = gen_stadium(track.straight, track.radius, track.half_width, vehicle.w_veh,
                       track.spacing);
  } else {
    rows = gen_s_curve(track.radius, track.half_width, vehicle.w_veh, track.spacing);
  }
  return build_track(rows.points, rows.w_left, rows.w_right, track.spacing);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  ExperimentConfig cfg;
  Obj root(j, origin);
  root.get("seed", cfg.seed);
  bool ablate_tg = cfg.env.ablate_tg;
  bool ablate_dc = cfg.learner.ablate_dc;
  root.get("ablate_tg", ablate_tg);
  root.get("ablate_dc", ablate_dc);
  cfg.env.ablate_tg = ablate_tg;
  cfg.learner.ablate_dc = ablate_dc;
  if (const json* c = root.child("track")) parse_track(*c, origin + ".track", cfg.track);
  if (const json* c = root.child("raceline")) {
    parse_raceline(*c, origin + ".raceline", cfg.raceline);
  }
  if (const json* c = root.child("vehicle")) parse_vehicle(*c, origin + ".vehicle", cfg.vehicle);
  if (const json* c = root.child("ggv")) parse_ggv(*c, origin + ".ggv", cfg.ggv);
  if (const json* c = root.child("envelope")) {
    parse_envelope(*c, origin + ".envelope", cfg.envelope);
  }
  if (const json* c = root.child("env")) parse_env(*c, origin + ".env", cfg.env);
  if (const json* c = root.child("learner")) parse_learner(*c, origin + ".learner", cfg.learner);
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg = parse_config(read_file(path), path);
  if (cfg.track.kind == "csv") {
    std::filesystem::path p(cfg.track.file);
    if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
    if (!std::filesystem::exists(p)) {
      throw ConfigError(path + ".track.file: no such file: " + p.string());
    }
  }
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["ablate_tg"] = cfg.env.ablate_tg;
  j["ablate_dc"] = cfg.learner.ablate_dc;
  j["track"] = {{"kind", cfg.track.kind},     {"file", cfg.track.file},
                {"radius", cfg.track.radius}, {"straight", cfg.track.straight},
                {"half_width", cfg.track.half_width}, {"spacing", cfg.track.spacing}};
  j["raceline"] = {{"epsilon", cfg.raceline.epsilon}, {"max_iters", cfg.raceline.max_iters}};
  j["vehicle"] = {{"m", cfg.vehicle.m},
                  {"I_z", cfg.vehicle.I_z},
                  {"l_f", cfg.vehicle.l_f},
                  {"l_r", cfg.vehicle.l_r},
                  {"C_alpha_f", cfg.vehicle.C_alpha_f},
                  {"C_alpha_r", cfg.vehicle.C_alpha_r},
                  {"w_veh", cfg.vehicle.w_veh},
                  {"length", cfg.vehicle.length},
                  {"a_max", cfg.vehicle.a_max},
                  {"delta_max", cfg.vehicle.delta_max},
                  {"u_min_dyn", cfg.vehicle.u_min_dyn}};
  j["ggv"] = {{"mu", cfg.ggv.mu},
              {"g", cfg.ggv.g},
              {"a_acc_max", cfg.ggv.a_acc_max},
              {"a_brk_max", cfg.ggv.a_brk_max},
              {"u_cap", cfg.ggv.u_cap}};
  j["envelope"] = {{"mu", cfg.envelope.mu},
                   {"g", cfg.envelope.g},
                   {"alpha_cbf", cfg.envelope.alpha_cbf},
                   {"window_len", cfg.envelope.window_len},
                   {"d_omega", cfg.envelope.d_omega},
                   {"d_beta", cfg.envelope.d_beta}};
  j["env"] = {{"grid",
               {{"H", cfg.env.grid.H}, {"W", cfg.env.grid.W}, {"cell_size", cfg.env.grid.cell_size}}},
              {"bands",
               {{"u_h1", cfg.env.bands.u_h1},
                {"u_h2", cfg.env.bands.u_h2},
                {"u_l1", cfg.env.bands.u_l1},
                {"u_l2", cfg.env.bands.u_l2}}},
              {"weights",
               {{"track", cfg.env.weights.track},
                {"hs", cfg.env.weights.hs},
                {"ls", cfg.env.weights.ls},
                {"lap", cfg.env.weights.lap},
                {"mcrl", cfg.env.weights.mcrl},
                {"ts", cfg.env.weights.ts},
                {"h", cfg.env.weights.h}}},
              {"dt", cfg.env.dt},
              {"max_episode_steps", cfg.env.max_episode_steps},
              {"reset_jitter", cfg.env.reset_jitter},
              {"reset_u", cfg.env.reset_u},
              {"k_preview", cfg.env.k_preview},
              {"L_min", cfg.env.L_min},
              {"L_max", cfg.env.L_max},
              {"strict_paper_formulas", cfg.env.strict_paper_formulas}};
  j["learner"] = {{"hidden", cfg.learner.hidden},
                  {"buffer_capacity", cfg.learner.buffer_capacity},
                  {"batch", cfg.learner.batch},
                  {"gamma", cfg.learner.sac.gamma},
                  {"lr", cfg.learner.sac.lr},
                  {"lr_entropy", cfg.learner.sac.lr_entropy},
                  {"polyak", cfg.learner.sac.polyak},
                  {"target_entropy", cfg.learner.sac.target_entropy},
                  {"lr_lambda", cfg.learner.lr_lambda},
                  {"upsilon_init", cfg.learner.upsilon_init},
                  {"t_max", cfg.learner.t_max},
                  {"t_start", cfg.learner.t_start},
                  {"t_switch", cfg.learner.t_switch},
                  {"eval_every", cfg.learner.eval_every},
                  {"eval_episodes", cfg.learner.eval_episodes},
                  {"final_eval_episodes", cfg.learner.final_eval_episodes},
                  {"skip_budget", cfg.learner.skip_budget}};
  return j.dump(2) + "\n";
}

}  // namespace apexrl
