#include "apexrl/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apexrl/errors.hpp"
#include "apexrl/runio.hpp"

namespace apexrl {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json eval_episode_to_json(const EvalEpisode& e) {
  return json{{"completed", e.completed},
              {"steps", e.steps},
              {"lap_time", e.lap_time},
              {"lap_avg_speed", e.lap_avg_speed},
              {"lap_progress_pct", e.lap_progress_pct},
              {"omega_unsafe_per_s", e.omega_unsafe_per_s},
              {"beta_unsafe_per_s", e.beta_unsafe_per_s},
              {"mean_windowed_c_omega", e.mean_windowed_c_omega},
              {"mean_windowed_c_beta", e.mean_windowed_c_beta},
              {"return_sum", e.return_sum}};
}

EvalEpisode eval_episode_from_json(const json& j) {
  EvalEpisode e;
  e.completed = j.at("completed").get<bool>();
  e.steps = j.at("steps").get<int>();
  e.lap_time = j.at("lap_time").get<double>();
  e.lap_avg_speed = j.at("lap_avg_speed").get<double>();
  e.lap_progress_pct = j.at("lap_progress_pct").get<double>();
  e.omega_unsafe_per_s = j.at("omega_unsafe_per_s").get<double>();
  e.beta_unsafe_per_s = j.at("beta_unsafe_per_s").get<double>();
  e.mean_windowed_c_omega = j.at("mean_windowed_c_omega").get<double>();
  e.mean_windowed_c_beta = j.at("mean_windowed_c_beta").get<double>();
  e.return_sum = j.at("return_sum").get<double>();
  return e;
}

json eval_summary_to_json(const EvalSummary& s) {
  json eps = json::array();
  for (const EvalEpisode& e : s.episodes) eps.push_back(eval_episode_to_json(e));
  return json{{"t", s.t}, {"episodes", std::move(eps)}};
}

EvalSummary eval_summary_from_json(const json& j) {
  EvalSummary s;
  s.t = j.at("t").get<long long>();
  for (const json& e : j.at("episodes")) s.episodes.push_back(eval_episode_from_json(e));
  return s;
}

// Update and episode tables are stored column-wise: far fewer bytes than one
// object per row at these lengths.
json updates_to_json(const std::vector<UpdateRow>& rows) {
  json j;
  auto col = [&rows](double UpdateRow::* f) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const UpdateRow& r : rows) v.push_back(r.*f);
    return json(v);
  };
  std::vector<long long> t;
  t.reserve(rows.size());
  for (const UpdateRow& r : rows) t.push_back(r.t);
  j["t"] = t;
  j["critic_loss"] = col(&UpdateRow::critic_loss);
  j["cost_critic_loss"] = col(&UpdateRow::cost_critic_loss);
  j["actor_loss"] = col(&UpdateRow::actor_loss);
  j["lambda_omega"] = col(&UpdateRow::lambda_omega);
  j["lambda_beta"] = col(&UpdateRow::lambda_beta);
  j["upsilon"] = col(&UpdateRow::upsilon);
  j["c_bar_omega"] = col(&UpdateRow::c_bar_omega);
  j["c_bar_beta"] = col(&UpdateRow::c_bar_beta);
  return j;
}

std::vector<UpdateRow> updates_from_json(const json& j) {
  const auto& t = j.at("t");
  std::vector<UpdateRow> rows(t.size());
  auto col = [&](const char* key, double UpdateRow::* f) {
    const json& c = j.at(key);
    if (c.size() != rows.size()) throw ParseError(std::string("updates.") + key + ": ragged");
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].*f = c[i].get<double>();
  };
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].t = t[i].get<long long>();
  col("critic_loss", &UpdateRow::critic_loss);
  col("cost_critic_loss", &UpdateRow::cost_critic_loss);
  col("actor_loss", &UpdateRow::actor_loss);
  col("lambda_omega", &UpdateRow::lambda_omega);
  col("lambda_beta", &UpdateRow::lambda_beta);
  col("upsilon", &UpdateRow::upsilon);
  col("c_bar_omega", &UpdateRow::c_bar_omega);
  col("c_bar_beta", &UpdateRow::c_bar_beta);
  return rows;
}

json episodes_to_json(const std::vector<EpisodeRow>& rows) {
  json j;
  std::vector<long long> t_end;
  std::vector<int> steps;
  std::vector<double> return_sum, progress_pct;
  std::vector<int> completed, terminated;
  for (const EpisodeRow& r : rows) {
    t_end.push_back(r.t_end);
    steps.push_back(r.steps);
    return_sum.push_back(r.return_sum);
    progress_pct.push_back(r.progress_pct);
    completed.push_back(r.completed ? 1 : 0);
    terminated.push_back(r.terminated ? 1 : 0);
  }
  j["t_end"] = t_end;
  j["steps"] = steps;
  j["return_sum"] = return_sum;
  j["progress_pct"] = progress_pct;
  j["completed"] = completed;
  j["terminated"] = terminated;
  return j;
}

std::vector<EpisodeRow> episodes_from_json(const json& j) {
  const auto& t_end = j.at("t_end");
  std::vector<EpisodeRow> rows(t_end.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].t_end = t_end[i].get<long long>();
    rows[i].steps = j.at("steps")[i].get<int>();
    rows[i].return_sum = j.at("return_sum")[i].get<double>();
    rows[i].progress_pct = j.at("progress_pct")[i].get<double>();
    rows[i].completed = j.at("completed")[i].get<int>() != 0;
    rows[i].terminated = j.at("terminated")[i].get<int>() != 0;
  }
  return rows;
}

}  // namespace

void write_report_json(const std::string& path, const TrainReport& report) {
  json j;
  j["version"] = kSchemaVersion;
  j["seed"] = report.seed;
  j["steps"] = report.steps;
  j["skipped_updates"] = report.skipped_updates;
  j["rejected_transitions"] = report.rejected_transitions;
  j["u_tar"] = report.u_tar;
  j["stage"] = report.stage;
  j["updates"] = updates_to_json(report.updates);
  j["episodes"] = episodes_to_json(report.episodes);
  json evals = json::array();
  for (const EvalSummary& s : report.evals) evals.push_back(eval_summary_to_json(s));
  j["evals"] = std::move(evals);
  j["final_eval"] = eval_summary_to_json(report.final_eval);
  write_file(path, j.dump() + "\n");
}

TrainReport read_report_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
    if (j.at("version").get<int>() != kSchemaVersion) {
      throw ParseError(path + ": unsupported report version");
    }
    TrainReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.steps = j.at("steps").get<long long>();
    r.skipped_updates = j.at("skipped_updates").get<long long>();
    r.rejected_transitions = j.at("rejected_transitions").get<long long>();
    r.u_tar = j.at("u_tar").get<std::vector<double>>();
    r.stage = j.at("stage").get<std::vector<int>>();
    r.updates = updates_from_json(j.at("updates"));
    r.episodes = episodes_from_json(j.at("episodes"));
    for (const json& s : j.at("evals")) r.evals.push_back(eval_summary_from_json(s));
    r.final_eval = eval_summary_from_json(j.at("final_eval"));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void export_report_csvs(const std::string& dir, const TrainReport& report) {
  ensure_dir(dir);
  const std::string base = dir + "/";
  {
    CsvWriter w(base + "eval_episodes.csv",
                {"t", "episode", "completed", "lap_time_s", "lap_avg_speed_mps",
                 "omega_unsafe_per_s", "beta_unsafe_per_s", "lap_progress_pct",
                 "mean_windowed_c_omega", "mean_windowed_c_beta", "return_sum"});
    for (const EvalSummary& s : report.evals) {
      for (std::size_t k = 0; k < s.episodes.size(); ++k) {
        const EvalEpisode& e = s.episodes[k];
        w.row({fmt(s.t), fmt(static_cast<long long>(k)), e.completed ? "1" : "0",
               e.completed ? fmt(e.lap_time) : "", fmt(e.lap_avg_speed),
               fmt(e.omega_unsafe_per_s), fmt(e.beta_unsafe_per_s), fmt(e.lap_progress_pct),
               fmt(e.mean_windowed_c_omega), fmt(e.mean_windowed_c_beta), fmt(e.return_sum)});
      }
    }
  }
  {
    CsvWriter w(base + "training_curves.csv",
                {"t", "lap_reward", "lap_time_s", "lap_avg_speed_mps", "lap_progress_pct"});
    for (const EvalSummary& s : report.evals) {
      double lap_time_sum = 0.0;
      int lap_time_n = 0;
      for (const EvalEpisode& e : s.episodes) {
        if (e.completed) {
          lap_time_sum += e.lap_time;
          ++lap_time_n;
        }
      }
      w.row({fmt(s.t), fmt(s.mean(&EvalEpisode::return_sum)),
             lap_time_n > 0 ? fmt(lap_time_sum / lap_time_n) : "",
             fmt(s.mean(&EvalEpisode::lap_avg_speed)),
             fmt(s.mean(&EvalEpisode::lap_progress_pct))});
    }
  }
  {
    CsvWriter w(base + "train_steps.csv", {"t", "stage", "u_tar"});
    for (std::size_t t = 0; t < report.u_tar.size(); ++t) {
      w.row({fmt(static_cast<long long>(t)), fmt(report.stage[t]), fmt(report.u_tar[t])});
    }
  }
  {
    CsvWriter w(base + "episodes.csv",
                {"t_end", "steps", "return_sum", "progress_pct", "completed", "terminated"});
    for (const EpisodeRow& r : report.episodes) {
      w.row({fmt(r.t_end), fmt(r.steps), fmt(r.return_sum), fmt(r.progress_pct),
             r.completed ? "1" : "0", r.terminated ? "1" : "0"});
    }
  }
  {
    CsvWriter w(base + "updates.csv",
                {"t", "critic_loss", "cost_critic_loss", "actor_loss", "lambda_omega",
                 "lambda_beta", "upsilon", "c_bar_omega", "c_bar_beta"});
    for (const UpdateRow& r : report.updates) {
      w.row({fmt(r.t), fmt(r.critic_loss), fmt(r.cost_critic_loss), fmt(r.actor_loss),
             fmt(r.lambda_omega), fmt(r.lambda_beta), fmt(r.upsilon), fmt(r.c_bar_omega),
             fmt(r.c_bar_beta)});
    }
  }
}

bool export_step_csvs(const std::string& dir, const std::string& steps_path) {
  std::ifstream in(steps_path, std::ios::binary);
  if (!in) return false;
  ensure_dir(dir);
  const std::string base = dir + "/";
  CsvWriter speed(base + "speed_vs_s.csv", {"s", "u", "u_tar"});
  CsvWriter envel(base + "beta_omega.csv", {"beta", "omega", "h_omega", "h_beta1", "h_beta2"});
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      continue;  // partial log tails are tolerated
    }
    if (!j.is_object() || !j.contains("s") || !j.contains("u")) continue;
    speed.row({fmt(j.at("s").get<double>()), fmt(j.at("u").get<double>()),
               j.contains("u_tar") ? fmt(j.at("u_tar").get<double>()) : ""});
    envel.row({fmt(j.value("beta", 0.0)), fmt(j.value("omega", 0.0)),
               fmt(j.value("h_omega", 0.0)), fmt(j.value("h_beta1", 0.0)),
               fmt(j.value("h_beta2", 0.0))});
    ++rows;
  }
  return rows > 0;
}

int export_plots(const std::string& run_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> warnings;
  const std::string report_path = run_dir + "/report.json";
  const std::string steps_path = run_dir + "/steps.jsonl";

  if (fs::exists(report_path)) {
    export_report_csvs(run_dir, read_report_json(report_path));
  } else {
    warnings.push_back("report.json missing: training curve exports skipped");
  }
  if (fs::exists(steps_path)) {
    if (!export_step_csvs(run_dir, steps_path)) {
      warnings.push_back("steps.jsonl has no usable rows: trace exports skipped");
    }
  } else {
    warnings.push_back("steps.jsonl missing: trace exports skipped");
  }

  if (!warnings.empty()) {
    std::ostringstream manifest;
    for (const std::string& w : warnings) manifest << w << '\n';
    write_file(run_dir + "/warnings.txt", manifest.str());
  }
  return static_cast<int>(warnings.size());
}

}  // namespace apexrl
