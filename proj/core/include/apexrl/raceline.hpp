#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "apexrl/geometry.hpp"
#include "apexrl/track.hpp"

namespace apexrl {

// Acceleration envelope for the speed profile: a friction circle capped by
// separate drive/brake limits and an absolute speed ceiling. The friction
// circle clamps the effective longitudinal capability pointwise, so drive and
// brake caps larger than mu*g simply never bind.
struct GGVParams {
  double mu = 1.0;
  double g = 9.81;
  double a_acc_max = 8.0;
  double a_brk_max = 12.0;
  double u_cap = 70.0;

  void validate() const;
  double a_lat_max() const { return mu * g; }
};

struct RacingLineRecord {
  double s = 0.0;      // arc-length coordinate on the source track
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;    // heading of the racing line (not the centerline)
  double kappa = 0.0;  // curvature of the racing line
  double u_ref = 0.0;  // reference speed; 0 until speed_profile runs
};

// Minimum-curvature line as lateral offsets from a source track, with the
// resulting records and solver diagnostics. Immutable after build.
struct RacingLine {
  std::vector<RacingLineRecord> records;
  std::vector<double> sigma;          // solved lateral offsets, meters
  const TrackModel* source_track = nullptr;
  double ds = 0.0;                    // record spacing (source track spacing)
  bool converged = false;
  int iterations = 0;
  double final_kappa_delta = 0.0;     // max |kappa change| at the last iteration
  std::vector<double> objective_history;  // sum of squared curvatures per accepted iterate

  std::size_t size() const { return records.size(); }
  Vec2 point(std::size_t i) const { return Vec2(records[i].x, records[i].y); }
};

// Solves min sum(kappa_i^2) over lateral offsets sigma with box bounds
// [-w_left_i + w_veh/2, w_right_i - w_veh/2] by damped Gauss-Newton steps on
// the numerically linearized curvature, projected onto the box; only strictly
// decreasing candidates are accepted (the damping doubles as the line
// search). Stops when the largest per-point curvature change between
// iterations drops to epsilon, or at max_iters with `converged` left false.
// u_ref is left unset.
RacingLine solve_mcrl(const TrackModel& track, double w_veh, double epsilon = 1e-4,
                      int max_iters = 200);

// Friction-limited speed profile: pointwise lateral-grip cap, then a forward
// (drive) and a backward (brake) pass with friction-circle coupling, each
// running around the loop twice so the result is independent of the start
// index. Populates u_ref in place.
void speed_profile(RacingLine& line, const GGVParams& ggv);

// Record at s_now + clamp(k_preview * u_now, L_min, L_max), wrap-aware, with
// linear interpolation (heading interpolated along the shortest angular path).
RacingLineRecord lookahead(const RacingLine& line, double s_now, double u_now,
                           double k_preview = 0.5, double L_min = 5.0, double L_max = 40.0);

// Nearest racing-line record to a world position (linear scan, optional
// warm-start as in track locate); lateral_offset is signed along the record's
// right normal.
LocateResult locate_line(const RacingLine& line, const Vec2& position,
                         std::size_t hint = static_cast<std::size_t>(-1));

// CSV export/import, header `s,x,y,phi,kappa,u_ref`.
void write_raceline_csv(const std::string& path, const RacingLine& line);

}  // namespace apexrl
