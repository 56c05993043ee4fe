#include "apexrl/trackgen.hpp"

#include <algorithm>
#include <cmath>

#include "apexrl/errors.hpp"
#include "apexrl/runio.hpp"

namespace apexrl {
namespace {

void check_corridor(double radius, double half_width, double w_veh) {
  if (!(radius > 10.0)) throw DomainError("generator radius must exceed 10 m");
  if (!(half_width > 0.0)) throw DomainError("half_width must be positive");
  if (!(2.0 * half_width > w_veh)) {
    throw DomainError("corridor " + fmt(2.0 * half_width) + " m is narrower than the vehicle (" +
                      fmt(w_veh) + " m)");
  }
}

// Emits points along straight/arc segments from a running pose. Each segment
// contributes its start point and interior samples but not its end point, so
// consecutive segments (and the implied closure) never duplicate points.
class PathBuilder {
 public:
  PathBuilder(Vec2 start, double heading, double spacing)
      : pos_(start), heading_(heading), spacing_(spacing) {}

  void straight(double length) {
    const Vec2 dir(std::cos(heading_), std::sin(heading_));
    const int n = std::max(1, static_cast<int>(std::ceil(length / spacing_)));
    for (int k = 0; k < n; ++k) {
      points.push_back(pos_ + (length * k / n) * dir);
    }
    pos_ += length * dir;
  }

  // Positive angle turns left (counter-clockwise), negative right.
  void arc(double radius, double angle) {
    const double side = angle >= 0.0 ? 1.0 : -1.0;
    const Vec2 to_center = side * Vec2(-std::sin(heading_), std::cos(heading_));
    const Vec2 center = pos_ + radius * to_center;
    const double arc_len = radius * std::abs(angle);
    const int n = std::max(1, static_cast<int>(std::ceil(arc_len / spacing_)));
    for (int k = 0; k < n; ++k) {
      const double a = angle * k / n;
      const Vec2 offset = pos_ - center;
      const double c = std::cos(a);
      const double s = std::sin(a);
      points.push_back(center + Vec2(c * offset.x() - s * offset.y(),
                                     s * offset.x() + c * offset.y()));
    }
    const Vec2 offset = pos_ - center;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    pos_ = center + Vec2(c * offset.x() - s * offset.y(), s * offset.x() + c * offset.y());
    heading_ = wrap_angle(heading_ + angle);
  }

  Vec2 pos() const { return pos_; }

  std::vector<Vec2> points;

 private:
  Vec2 pos_;
  double heading_;
  double spacing_;
};

TrackRows with_constant_width(std::vector<Vec2> points, double half_width) {
  TrackRows rows;
  rows.w_left.assign(points.size(), half_width);
  rows.w_right.assign(points.size(), half_width);
  rows.points = std::move(points);
  return rows;
}

// Every generated track carries at least 100 samples regardless of the
// requested spacing.
double capped_spacing(double spacing, double perimeter) {
  if (!(spacing > 0.0)) throw DomainError("spacing must be positive");
  return std::min(spacing, perimeter / 100.0);
}

}  // namespace

TrackRows gen_circle(double radius, double half_width, double w_veh, double spacing) {
  check_corridor(radius, half_width, w_veh);
  PathBuilder pb(Vec2(radius, 0.0), kPi / 2.0, capped_spacing(spacing, 2.0 * kPi * radius));
  pb.arc(radius, 2.0 * kPi);
  return with_constant_width(std::move(pb.points), half_width);
}

TrackRows gen_stadium(double straight, double radius, double half_width, double w_veh,
                      double spacing) {
  check_corridor(radius, half_width, w_veh);
  if (!(straight > 0.0)) throw DomainError("straight length must be positive");
  PathBuilder pb(Vec2(0.0, 0.0), 0.0,
                 capped_spacing(spacing, 2.0 * straight + 2.0 * kPi * radius));
  pb.straight(straight);
  pb.arc(radius, kPi);
  pb.straight(straight);
  pb.arc(radius, kPi);
  return with_constant_width(std::move(pb.points), half_width);
}

TrackRows gen_s_curve(double radius, double half_width, double w_veh, double spacing) {
  check_corridor(radius, half_width, w_veh);
  PathBuilder pb(Vec2(0.0, 0.0), 0.0, capped_spacing(spacing, 160.0 + 6.0 * kPi * radius));
  pb.straight(60.0);
  pb.arc(radius, kPi);  // left
  pb.straight(20.0);
  pb.arc(radius, -kPi);  // right: the opposed pair forming the S
  pb.straight(20.0);
  pb.arc(radius, kPi);  // left
  pb.straight(60.0);
  pb.arc(3.0 * radius, kPi);  // wide return arc closes the loop
  if ((pb.pos() - Vec2(0.0, 0.0)).norm() > 1e-6) {
    throw ContractError("s_curve generator failed to close the loop");
  }
  return with_constant_width(std::move(pb.points), half_width);
}

void write_track_csv(const std::string& path, const TrackRows& rows) {
  CsvWriter csv(path, {"x", "y", "w_left", "w_right"});
  for (std::size_t i = 0; i < rows.points.size(); ++i) {
    csv.row({fmt(rows.points[i].x()), fmt(rows.points[i].y()), fmt(rows.w_left[i]),
             fmt(rows.w_right[i])});
  }
}

}  // namespace apexrl
