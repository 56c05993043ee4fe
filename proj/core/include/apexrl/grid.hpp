#pragma once

#include <Eigen/Dense>

#include "apexrl/raceline.hpp"
#include "apexrl/track.hpp"
#include "apexrl/vehicle.hpp"

namespace apexrl {

struct GridConfig {
  int H = 32;
  int W = 32;
  double cell_size = 2.0;  // meters per cell

  void validate() const;
  int obs_dim() const { return kChannels * H * W; }
  static constexpr int kChannels = 5;
};

// Ego-centric multi-channel grid, flattened channel-major (c, row, col).
// Channels: 0 track-boundary binary, 1 racing-line binary, 2 ego u (by
// u_cap), 3 ego v (by 10 m/s), 4 ego heading error vs. the local track
// tangent (by pi). Channels 2-4 are written only at the ego cell. Forward is
// up; the ego sits at row 3H/4 from the top, column W/2, so most of the view
// looks ahead.
struct ObservationGrid {
  int H = 0;
  int W = 0;
  double cell_size = 0.0;
  Eigen::VectorXd data;  // size 5*H*W

  double& at(int c, int r, int w) { return data[(c * H + r) * W + w]; }
  double at(int c, int r, int w) const { return data[(c * H + r) * W + w]; }
};

// Rasterizes boundary and racing-line sample points into the grid around the
// given state. `nearest_track_idx` is the index from locate() at the current
// position (used for the heading-error embedding). When `mcrl_channel` is
// false the racing-line channel is left all-zero (trajectory-guidance
// ablation) but keeps its slot so the observation size is unchanged.
ObservationGrid build_observation(const VehicleState& state, const TrackModel& track,
                                  const RacingLine& line, const GridConfig& cfg, double u_cap,
                                  bool mcrl_channel, std::size_t nearest_track_idx);

}  // namespace apexrl
