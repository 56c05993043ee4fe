#pragma once

#include <string>

#include "apexrl/learner.hpp"

namespace apexrl {

// Full-precision JSON serialization of a training report; byte-identical for
// identical reports.
void write_report_json(const std::string& path, const TrainReport& report);
TrainReport read_report_json(const std::string& path);

// Plot-ready CSVs derived from a report, written into `dir`:
//   eval_episodes.csv   one row per evaluation episode (lap_time_s empty when
//                       the lap was not completed)
//   training_curves.csv one row per evaluation snapshot (means over episodes)
//   train_steps.csv     per-step stage and target speed
//   episodes.csv        training episode summaries
//   updates.csv         per-update losses, multipliers, entropy weight
void export_report_csvs(const std::string& dir, const TrainReport& report);

// Converts a simulate step log (JSON lines) into speed_vs_s.csv and
// beta_omega.csv in `dir`. Returns false when the log has no usable rows.
bool export_step_csvs(const std::string& dir, const std::string& steps_path);

// Plot export over a run directory holding report.json and/or steps.jsonl.
// Missing inputs are skipped and listed in warnings.txt; returns the number
// of warnings (0 means everything was exported).
int export_plots(const std::string& run_dir);

}  // namespace apexrl
