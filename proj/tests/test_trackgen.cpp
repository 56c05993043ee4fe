#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "apexrl/errors.hpp"
#include "apexrl/track.hpp"
#include "apexrl/trackgen.hpp"

using namespace apexrl;

TEST_CASE("gen_circle: loadable CSV with the right length") {
  const TrackRows rows = gen_circle(50.0, 5.0);
  CHECK(rows.points.size() >= 100);
  const std::string path = "/tmp/apexrl_gen_circle.csv";
  write_track_csv(path, rows);
  const TrackModel t = load_track(path, 1.0);
  CHECK(t.total_length == doctest::Approx(314.1592653589793).epsilon(0.005));
  std::remove(path.c_str());
}

TEST_CASE("gen_stadium: perimeter formula") {
  const TrackRows rows = gen_stadium(100.0, 20.0, 6.0);
  const TrackModel t = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
  CHECK(t.total_length == doctest::Approx(325.66370614359175).epsilon(0.005));
}

TEST_CASE("gen_s_curve: closes and has the analytic length") {
  const TrackRows rows = gen_s_curve(25.0, 6.0);
  const TrackModel t = build_track(rows.points, rows.w_left, rows.w_right, 1.0);
  CHECK(t.total_length == doctest::Approx(631.238898038469).epsilon(0.005));
  CHECK(t.closed);
}

TEST_CASE("generators: at least 100 points even for small loops") {
  const TrackRows rows = gen_circle(10.5, 5.0, 2.0, 5.0);  // coarse spacing requested
  CHECK(rows.points.size() >= 100);
}

TEST_CASE("generators: parameter guards") {
  CHECK_THROWS_AS(gen_circle(10.0, 5.0), DomainError);       // radius must exceed 10
  CHECK_THROWS_AS(gen_circle(50.0, 0.9, 2.0), DomainError);  // corridor narrower than vehicle
  CHECK_THROWS_AS(gen_stadium(0.0, 20.0, 6.0), DomainError);
  CHECK_THROWS_AS(gen_s_curve(25.0, 6.0, 2.0, 0.0), DomainError);  // bad spacing
}

TEST_CASE("generators: rerun is byte-identical") {
  const std::string a = "/tmp/apexrl_gen_a.csv";
  const std::string b = "/tmp/apexrl_gen_b.csv";
  write_track_csv(a, gen_stadium(60.0, 20.0, 6.0));
  write_track_csv(b, gen_stadium(60.0, 20.0, 6.0));
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  const std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
  CHECK(!ca.empty());
  std::remove(a.c_str());
  std::remove(b.c_str());
}
