#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "apexrl/geometry.hpp"

namespace apexrl {

// Closed centerline resampled to uniform arc-length spacing, with per-point
// corridor widths and discrete differential geometry.
//
// Sign convention (project-wide): normals point to the right of the travel
// direction, and lateral offsets are positive toward the w_right boundary.
// Immutable after construction; safe to share read-only across threads.
struct TrackModel {
  std::vector<Vec2> points;
  std::vector<double> w_left;
  std::vector<double> w_right;
  std::vector<double> s;  // cumulative arc length, s[0] = 0
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;
  std::vector<double> kappa;  // signed, positive for counter-clockwise turning
  double total_length = 0.0;
  bool closed = true;

  std::size_t size() const { return points.size(); }
};

struct LocateResult {
  std::size_t index;
  double s;
  double lateral_offset;  // signed along normal[index], positive toward w_right
};

// Signed discrete curvature of a closed point loop via central second
// differences with wrap-around indexing. The formula cross(p', p'') / |p'|^3
// is evaluated with a unit nominal parameter step, which cancels, so the
// result does not depend on the (assumed uniform) spacing.
std::vector<double> discrete_curvature(const std::vector<Vec2>& points);

// Builds a TrackModel from already-loaded raw centerline rows (pre-resampling).
TrackModel build_track(const std::vector<Vec2>& raw_points, const std::vector<double>& raw_w_left,
                       const std::vector<double>& raw_w_right, double resample_step);

// Loads a track CSV (header `x,y,w_left,w_right`, meters) and resamples it to
// uniform spacing along the closed polyline. Throws ParseError with the line
// number on malformed rows, InvalidTrackError if fewer than 8 distinct points
// remain after deduplication. Self-intersection is not detected.
TrackModel load_track(const std::string& path, double resample_step);

// Nearest centerline point by linear scan; s is refined by projecting onto
// the local tangent so it moves continuously between samples. `hint`
// warm-starts the scan for callers stepping along the track; pass SIZE_MAX
// for a cold full scan. The hint is caller-owned state, never stored in the
// track.
LocateResult locate(const TrackModel& track, const Vec2& position,
                    std::size_t hint = static_cast<std::size_t>(-1));

// Wrap-aware signed arc-length difference in (-L/2, L/2].
double progress_delta(const TrackModel& track, double s_prev, double s_now);

}  // namespace apexrl
