#pragma once

#include <Eigen/Dense>

#include "apexrl/raceline.hpp"
#include "apexrl/vehicle.hpp"

namespace apexrl {

// Scripted racing-line follower: pure-pursuit steering toward a speed-scaled
// preview point plus proportional tracking of the profile speed. Emits
// normalized actions compatible with RaceEnv::step. Used as a learning-free
// oracle that completes laps at roughly the profile speed.
class LineFollowController {
 public:
  LineFollowController(const RacingLine& line, const VehicleParams& params,
                       double preview_time = 0.4, double preview_min = 4.0,
                       double preview_max = 30.0, double k_speed = 1.5);

  Eigen::Vector2d act(const VehicleState& state);
  void reset() { hint_ = static_cast<std::size_t>(-1); }

 private:
  const RacingLine* line_;
  VehicleParams params_;
  double preview_time_;
  double preview_min_;
  double preview_max_;
  double k_speed_;
  std::size_t hint_ = static_cast<std::size_t>(-1);
};

}  // namespace apexrl
