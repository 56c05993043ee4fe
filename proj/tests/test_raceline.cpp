#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "apexrl/errors.hpp"
#include "apexrl/raceline.hpp"
#include "apexrl/track.hpp"
#include "apexrl/trackgen.hpp"

using namespace apexrl;

namespace {

TrackModel make_track(const TrackRows& rows, double step = 1.0) {
  return build_track(rows.points, rows.w_left, rows.w_right, step);
}

double objective_of_offsets(const TrackModel& t, double sigma) {
  std::vector<Vec2> pts;
  pts.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) pts.push_back(t.points[i] + sigma * t.normal[i]);
  const auto kappa = discrete_curvature(pts);
  double acc = 0.0;
  for (double k : kappa) acc += k * k;
  return acc;
}

double centerline_objective(const TrackModel& t) {
  double acc = 0.0;
  for (double k : t.kappa) acc += k * k;
  return acc;
}

// Straight-line record row for hand-built speed-profile fixtures.
RacingLine synthetic_line(const std::vector<double>& kappa, double ds) {
  RacingLine line;
  line.ds = ds;
  double s = 0.0;
  for (double k : kappa) {
    RacingLineRecord r;
    r.s = s;
    r.kappa = k;
    line.records.push_back(r);
    s += ds;
  }
  return line;
}

}  // namespace

TEST_CASE("solve_mcrl: annulus pushes to the outer bound") {
  const TrackModel t = make_track(gen_circle(50.0, 5.0));

  // Brute-force oracle over constant offsets: +4 m (outer) minimizes sum k^2.
  double best_sigma = 0.0;
  double best_obj = 1e300;
  for (int k = -40; k <= 40; ++k) {
    const double sigma = 0.1 * k;
    const double obj = objective_of_offsets(t, sigma);
    if (obj < best_obj) {
      best_obj = obj;
      best_sigma = sigma;
    }
  }
  CHECK(best_sigma == doctest::Approx(4.0));

  const RacingLine line = solve_mcrl(t, 2.0);
  CHECK(line.converged);
  CHECK(line.iterations <= 200);
  for (double sigma : line.sigma) CHECK(sigma == doctest::Approx(4.0).epsilon(1e-3));
  for (const auto& r : line.records) {
    CHECK(r.kappa == doctest::Approx(1.0 / 54.0).epsilon(5e-3));
  }
  // Solver matches or beats the best constant offset.
  double obj = 0.0;
  for (const auto& r : line.records) obj += r.kappa * r.kappa;
  CHECK(obj <= best_obj * (1.0 + 1e-6));
}

TEST_CASE("solve_mcrl: objective history strictly decreases") {
  const TrackModel t = make_track(gen_s_curve(25.0, 6.0));
  const RacingLine line = solve_mcrl(t, 2.0);
  REQUIRE(line.objective_history.size() >= 2);
  for (std::size_t i = 1; i < line.objective_history.size(); ++i) {
    CHECK(line.objective_history[i] < line.objective_history[i - 1]);
  }
}

TEST_CASE("solve_mcrl: s-curve beats the centerline by 20%") {
  const TrackModel t = make_track(gen_s_curve(25.0, 6.0));
  const RacingLine line = solve_mcrl(t, 2.0);
  double obj = 0.0;
  for (const auto& r : line.records) obj += r.kappa * r.kappa;
  CHECK(obj <= 0.8 * centerline_objective(t));
  // Offsets respect the corridor bounds.
  for (std::size_t i = 0; i < line.sigma.size(); ++i) {
    CHECK(line.sigma[i] >= -t.w_left[i] + 1.0 - 1e-12);
    CHECK(line.sigma[i] <= t.w_right[i] - 1.0 + 1e-12);
  }
}

TEST_CASE("solve_mcrl: long stadium straights solve to a straight line") {
  const TrackModel t = make_track(gen_stadium(200.0, 20.0, 6.0));
  const RacingLine line = solve_mcrl(t, 2.0);
  // Middle of the first straight: records near s = 100. The optimum keeps the
  // straight parallel to the centerline (constant offset, zero curvature);
  // the offset itself is set by the corner exit, not pinned to 0.
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (std::abs(line.records[i].s - 100.0) < 10.0) {
      lo = std::min(lo, line.sigma[i]);
      hi = std::max(hi, line.sigma[i]);
      CHECK(std::abs(line.records[i].kappa) < 1e-3);
    }
  }
  CHECK(hi - lo < 0.05);
  CHECK(hi <= 5.0 + 1e-12);
  CHECK(lo >= -5.0 - 1e-12);
}

TEST_CASE("solve_mcrl: infeasible corridor is refused with the index") {
  auto rows = gen_circle(50.0, 5.0);
  // Pinch a 2 m span so at least one resampled point lands inside it.
  for (std::size_t i = 9; i <= 11; ++i) {
    rows.w_left[i] = 0.05;
    rows.w_right[i] = 0.05;  // narrower than the vehicle
  }
  const TrackModel t = make_track(rows, 1.0);
  try {
    solve_mcrl(t, 2.0);
    FAIL("expected InfeasibleCorridorError");
  } catch (const InfeasibleCorridorError& e) {
    CHECK(e.index < t.size());
    CHECK(t.w_left[e.index] + t.w_right[e.index] < 2.0);
  }
}

TEST_CASE("ggv: validation and lateral cap") {
  GGVParams ggv;
  CHECK(ggv.a_lat_max() == doctest::Approx(9.81));
  ggv.mu = 0.0;
  CHECK_THROWS_AS(ggv.validate(), ConfigError);
  ggv = GGVParams{};
  ggv.u_cap = -1.0;
  CHECK_THROWS_AS(ggv.validate(), ConfigError);
}

TEST_CASE("speed_profile: constant curvature saturates the lateral limit") {
  RacingLine line = synthetic_line(std::vector<double>(314, 0.02), 1.0);
  speed_profile(line, GGVParams{});
  for (const auto& r : line.records) {
    CHECK(r.u_ref == doctest::Approx(22.147234590350102).epsilon(1e-3 / 22.0));
  }
}

TEST_CASE("speed_profile: straight loop rides the cap") {
  RacingLine line = synthetic_line(std::vector<double>(200, 0.0), 1.0);
  speed_profile(line, GGVParams{});
  for (const auto& r : line.records) CHECK(r.u_ref == doctest::Approx(70.0).epsilon(1e-12));
}

TEST_CASE("speed_profile: hairpin entry speed and braking envelope") {
  std::vector<double> kappa(300, 0.0);
  for (int i = 200; i < 300; ++i) kappa[i] = 0.05;
  RacingLine line = synthetic_line(kappa, 1.0);
  const GGVParams ggv;
  speed_profile(line, ggv);

  const double u_entry = line.records[200].u_ref;
  CHECK(u_entry == doctest::Approx(14.007141035914502).epsilon(1e-3 / 14.0));
  for (int i = 0; i < 200; ++i) {
    const double d = 200.0 - i;
    CHECK(line.records[i].u_ref * line.records[i].u_ref <=
          u_entry * u_entry + 2.0 * ggv.a_brk_max * d + 1e-9);
  }
  for (const auto& r : line.records) {
    CHECK(r.u_ref > 0.0);
    CHECK(r.u_ref <= ggv.u_cap + 1e-12);
  }
}

TEST_CASE("speed_profile: start-index independence") {
  std::vector<double> kappa(300, 0.0);
  for (int i = 40; i < 90; ++i) kappa[i] = 0.03;
  for (int i = 200; i < 260; ++i) kappa[i] = 0.05;
  RacingLine base = synthetic_line(kappa, 1.0);
  speed_profile(base, GGVParams{});

  const std::size_t shift = 137;
  std::vector<double> rotated(kappa.size());
  for (std::size_t i = 0; i < kappa.size(); ++i) rotated[i] = kappa[(i + shift) % kappa.size()];
  RacingLine shifted = synthetic_line(rotated, 1.0);
  speed_profile(shifted, GGVParams{});

  for (std::size_t i = 0; i < kappa.size(); ++i) {
    CHECK(shifted.records[i].u_ref ==
          doctest::Approx(base.records[(i + shift) % kappa.size()].u_ref).epsilon(1e-9));
  }
}

TEST_CASE("lookahead: preview clamping and wrap") {
  const TrackModel t = make_track(gen_circle(50.0, 5.0));
  RacingLine line = solve_mcrl(t, 2.0);
  speed_profile(line, GGVParams{});
  const double L = line.records.back().s + line.ds;

  const RacingLineRecord at_min = lookahead(line, 10.0, 0.0);
  CHECK(at_min.s == doctest::Approx(15.0).epsilon(1e-9));

  const RacingLineRecord at_max = lookahead(line, 10.0, 200.0);
  CHECK(at_max.s == doctest::Approx(50.0).epsilon(1e-9));

  const RacingLineRecord wrapped = lookahead(line, L - 2.0, 200.0);
  CHECK(wrapped.s >= 0.0);
  CHECK(wrapped.s < 40.0);
}

TEST_CASE("lookahead: requires a populated speed profile") {
  const TrackModel t = make_track(gen_circle(50.0, 5.0));
  RacingLine line = solve_mcrl(t, 2.0);
  CHECK_THROWS_AS(lookahead(line, 0.0, 10.0), ContractError);
}

TEST_CASE("locate_line: exact record and offset sign") {
  const TrackModel t = make_track(gen_circle(50.0, 5.0));
  RacingLine line = solve_mcrl(t, 2.0);
  speed_profile(line, GGVParams{});

  const std::size_t i = 25;
  const LocateResult hit = locate_line(line, line.point(i));
  CHECK(hit.index == i);
  CHECK(hit.lateral_offset == doctest::Approx(0.0).epsilon(1e-9));

  // Right normal of the line heading: phi rotated -90 degrees.
  const double phi = line.records[i].phi;
  const Vec2 right(std::sin(phi), -std::cos(phi));
  const LocateResult off = locate_line(line, line.point(i) + 1.5 * right);
  CHECK(off.lateral_offset == doctest::Approx(1.5).epsilon(0.4));
}

TEST_CASE("write_raceline_csv: header and full-precision rows") {
  const TrackModel t = make_track(gen_circle(50.0, 5.0));
  RacingLine line = solve_mcrl(t, 2.0);
  speed_profile(line, GGVParams{});
  const std::string path = "/tmp/apexrl_raceline.csv";
  write_raceline_csv(path, line);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "s,x,y,phi,kappa,u_ref");
  std::string row;
  std::getline(f, row);
  CHECK(!row.empty());
  std::remove(path.c_str());
}
