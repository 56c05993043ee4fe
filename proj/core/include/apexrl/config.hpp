#pragma once

#include <cstdint>
#include <string>

#include "apexrl/env.hpp"
#include "apexrl/learner.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/safety.hpp"
#include "apexrl/track.hpp"
#include "apexrl/trackgen.hpp"
#include "apexrl/vehicle.hpp"

namespace apexrl {

// Where the track comes from: a synthetic generator or a CSV file.
struct TrackSourceConfig {
  std::string kind = "stadium";  // circle | stadium | s_curve | csv
  std::string file;              // used when kind == "csv"
  double radius = 20.0;
  double straight = 100.0;  // stadium straight length
  double half_width = 6.0;
  double spacing = 1.0;

  void validate(double w_veh) const;
};

struct RacelineSolverConfig {
  double epsilon = 1e-4;
  int max_iters = 200;

  void validate() const;
};

// One experiment, fully specified. The ablation flags live on the sub-configs
// they act on (env.ablate_tg, learner.ablate_dc) but parse/serialize at the
// top level of the file.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  TrackSourceConfig track;
  RacelineSolverConfig raceline;
  VehicleParams vehicle;
  GGVParams ggv;
  EnvelopeParams envelope;
  EnvConfig env;
  LearnerConfig learner;

  bool ablate_tg() const { return env.ablate_tg; }
  bool ablate_dc() const { return learner.ablate_dc; }

  void validate() const;

  // Builds the track per `track`; `base_dir` resolves a relative CSV path.
  TrackModel build_track_model(const std::string& base_dir) const;
};

// Strict JSON schema: unknown keys and type mismatches are rejected with the
// offending field path. Absent fields keep their defaults.
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

// Reads and parses; relative track CSV paths are kept as written.
ExperimentConfig load_config(const std::string& path);

// Canonical full-precision form; parse(serialize(c)) == c field for field.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace apexrl
