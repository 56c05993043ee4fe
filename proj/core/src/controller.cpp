#include "apexrl/controller.hpp"

#include <algorithm>
#include <cmath>

namespace apexrl {

LineFollowController::LineFollowController(const RacingLine& line, const VehicleParams& params,
                                           double preview_time, double preview_min,
                                           double preview_max, double k_speed)
    : line_(&line),
      params_(params),
      preview_time_(preview_time),
      preview_min_(preview_min),
      preview_max_(preview_max),
      k_speed_(k_speed) {}

Eigen::Vector2d LineFollowController::act(const VehicleState& state) {
  const Vec2 pos(state.x, state.y);
  const LocateResult loc = locate_line(*line_, pos, hint_);
  hint_ = loc.index;

  const double preview = std::clamp(preview_time_ * state.u, preview_min_, preview_max_);
  const RacingLineRecord target =
      lookahead(*line_, loc.s, state.u, preview_time_, preview_min_, preview_max_);

  // Pure pursuit on the preview point expressed in the body frame.
  const Vec2 rel = Vec2(target.x, target.y) - pos;
  const double ahead = rel.x() * std::cos(state.phi) + rel.y() * std::sin(state.phi);
  const double side = -rel.x() * std::sin(state.phi) + rel.y() * std::cos(state.phi);
  const double eta = std::atan2(side, ahead);
  const double wheelbase = params_.l_f + params_.l_r;
  const double delta = std::atan(2.0 * wheelbase * std::sin(eta) / preview);

  // Track the slower of the local and preview reference speeds so braking
  // starts before the corner.
  const double u_des = std::min(line_->records[loc.index].u_ref, target.u_ref);
  const double accel = k_speed_ * (u_des - state.u);

  Eigen::Vector2d action;
  action[0] = std::clamp(accel / params_.a_max, -1.0, 1.0);
  action[1] = std::clamp(delta / params_.delta_max, -1.0, 1.0);
  return action;
}

}  // namespace apexrl
