#include "apexrl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "apexrl/errors.hpp"

namespace apexrl {

void GridConfig::validate() const {
  if (H < 4 || W < 4) throw ConfigError("grid must be at least 4x4");
  if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive");
}

ObservationGrid build_observation(const VehicleState& state, const TrackModel& track,
                                  const RacingLine& line, const GridConfig& cfg, double u_cap,
                                  bool mcrl_channel, std::size_t nearest_track_idx) {
  ObservationGrid grid;
  grid.H = cfg.H;
  grid.W = cfg.W;
  grid.cell_size = cfg.cell_size;
  grid.data = Eigen::VectorXd::Zero(cfg.obs_dim());

  const int ego_row = cfg.H * 3 / 4;
  const int ego_col = cfg.W / 2;
  const Vec2 ego(state.x, state.y);
  const Vec2 fwd(std::cos(state.phi), std::sin(state.phi));
  const Vec2 right = right_normal(fwd);

  // World point -> cell indices in the ego frame (forward = up). Returns
  // false when outside the view.
  auto to_cell = [&](const Vec2& p, int& r, int& c) {
    const Vec2 rel = p - ego;
    const double ahead = rel.dot(fwd);
    const double side = rel.dot(right);
    r = ego_row - static_cast<int>(std::lround(ahead / cfg.cell_size));
    c = ego_col + static_cast<int>(std::lround(side / cfg.cell_size));
    return r >= 0 && r < cfg.H && c >= 0 && c < cfg.W;
  };

  int r = 0;
  int c = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    const Vec2 right_edge = track.points[i] + track.w_right[i] * track.normal[i];
    const Vec2 left_edge = track.points[i] - track.w_left[i] * track.normal[i];
    if (to_cell(right_edge, r, c)) grid.at(0, r, c) = 1.0;
    if (to_cell(left_edge, r, c)) grid.at(0, r, c) = 1.0;
  }
  if (mcrl_channel) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (to_cell(line.point(i), r, c)) grid.at(1, r, c) = 1.0;
    }
  }

  const double phi_tangent =
      std::atan2(track.tangent[nearest_track_idx].y(), track.tangent[nearest_track_idx].x());
  grid.at(2, ego_row, ego_col) = std::clamp(state.u / u_cap, -1.0, 1.0);
  grid.at(3, ego_row, ego_col) = std::clamp(state.v / 10.0, -1.0, 1.0);
  grid.at(4, ego_row, ego_col) = wrap_angle(state.phi - phi_tangent) / kPi;
  return grid;
}

}  // namespace apexrl
