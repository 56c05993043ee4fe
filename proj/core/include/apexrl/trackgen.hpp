#pragma once

#include <string>
#include <vector>

#include "apexrl/geometry.hpp"

namespace apexrl {

// Raw centerline rows as they appear in a track CSV (pre-resampling).
struct TrackRows {
  std::vector<Vec2> points;
  std::vector<double> w_left;
  std::vector<double> w_right;
};

// All generators emit closed counter-clockwise loops sampled roughly every
// `spacing` meters (at least 100 points), with constant half-width corridors.
// They refuse radii ≤ 10 m and corridors not strictly wider than w_veh.

// Circle of the given centerline radius.
TrackRows gen_circle(double radius, double half_width, double w_veh = 2.0, double spacing = 1.0);

// Two parallel straights joined by semicircular ends.
TrackRows gen_stadium(double straight, double radius, double half_width, double w_veh = 2.0,
                      double spacing = 1.0);

// A winding loop whose middle section is two opposed `radius` arcs joined by
// short straights (an S of alternating turn directions), closed by a large
// return arc of radius 3·radius.
TrackRows gen_s_curve(double radius, double half_width, double w_veh = 2.0, double spacing = 1.0);

// Writes rows in the track CSV format (`x,y,w_left,w_right` header).
void write_track_csv(const std::string& path, const TrackRows& rows);

}  // namespace apexrl
