#include "apexrl/track.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "apexrl/errors.hpp"

namespace apexrl {
namespace {

constexpr double kDedupEps = 1e-9;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& path, std::size_t line_no) {
  const std::string f = trim(field);
  double value = 0.0;
  const char* begin = f.data();
  const char* end = begin + f.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || f.empty()) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected a number, got '" + field +
                     "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Cumulative arc length of the closed polyline; result has raw.size() + 1
// entries, the last being the total length (closing segment included).
std::vector<double> closed_arclength(const std::vector<Vec2>& raw) {
  std::vector<double> acc(raw.size() + 1, 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Vec2& a = raw[i];
    const Vec2& b = raw[(i + 1) % raw.size()];
    acc[i + 1] = acc[i] + (b - a).norm();
  }
  return acc;
}

}  // namespace

std::vector<double> discrete_curvature(const std::vector<Vec2>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidTrackError("discrete_curvature needs at least 3 points");
  std::vector<double> kappa(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = points[(i + n - 1) % n];
    const Vec2& next = points[(i + 1) % n];
    const Vec2 d1 = 0.5 * (next - prev);            // p' with unit nominal step
    const Vec2 d2 = next - 2.0 * points[i] + prev;  // p''
    const double speed = d1.norm();
    if (speed < 1e-12) {
      throw InvalidTrackError("degenerate point spacing at index " + std::to_string(i));
    }
    kappa[i] = cross2(d1, d2) / (speed * speed * speed);
  }
  return kappa;
}

TrackModel build_track(const std::vector<Vec2>& raw_points, const std::vector<double>& raw_w_left,
                       const std::vector<double>& raw_w_right, double resample_step) {
  if (!(resample_step > 0.0) || !std::isfinite(resample_step)) {
    throw DomainError("resample_step must be positive and finite");
  }
  if (raw_points.size() != raw_w_left.size() || raw_points.size() != raw_w_right.size()) {
    throw ContractError("point/width array size mismatch");
  }

  // Drop consecutive duplicates (and a trailing closure row equal to the
  // first point): the polyline is treated as closed implicitly.
  std::vector<Vec2> pts;
  std::vector<double> wl;
  std::vector<double> wr;
  pts.reserve(raw_points.size());
  for (std::size_t i = 0; i < raw_points.size(); ++i) {
    if (!pts.empty() && (raw_points[i] - pts.back()).norm() < kDedupEps) continue;
    pts.push_back(raw_points[i]);
    wl.push_back(raw_w_left[i]);
    wr.push_back(raw_w_right[i]);
  }
  if (pts.size() > 1 && (pts.back() - pts.front()).norm() < kDedupEps) {
    pts.pop_back();
    wl.pop_back();
    wr.pop_back();
  }
  if (pts.size() < 8) {
    throw InvalidTrackError("track needs at least 8 distinct points, got " +
                            std::to_string(pts.size()));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(wl[i] > 0.0) || !(wr[i] > 0.0)) {
      throw InvalidTrackError("non-positive corridor width at point " + std::to_string(i));
    }
  }

  const std::vector<double> acc = closed_arclength(pts);
  const double total = acc.back();
  if (!(total > 0.0)) throw InvalidTrackError("track has zero length");

  const auto n_target = static_cast<std::size_t>(
      std::max<long long>(8, std::llround(total / resample_step)));
  const double ds = total / static_cast<double>(n_target);

  TrackModel track;
  track.points.resize(n_target);
  track.w_left.resize(n_target);
  track.w_right.resize(n_target);
  track.s.resize(n_target);
  track.total_length = total;
  track.closed = true;

  // Walk the closed polyline once, emitting a sample every ds meters.
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_target; ++k) {
    const double target = static_cast<double>(k) * ds;
    while (seg + 1 < acc.size() - 1 && acc[seg + 1] <= target) ++seg;
    const double seg_len = acc[seg + 1] - acc[seg];
    const double t = seg_len > 0.0 ? (target - acc[seg]) / seg_len : 0.0;
    const std::size_t a = seg;
    const std::size_t b = (seg + 1) % pts.size();
    track.points[k] = (1.0 - t) * pts[a] + t * pts[b];
    track.w_left[k] = (1.0 - t) * wl[a] + t * wl[b];
    track.w_right[k] = (1.0 - t) * wr[a] + t * wr[b];
    track.s[k] = target;
  }

  track.kappa = discrete_curvature(track.points);
  track.tangent.resize(n_target);
  track.normal.resize(n_target);
  for (std::size_t i = 0; i < n_target; ++i) {
    const Vec2& prev = track.points[(i + n_target - 1) % n_target];
    const Vec2& next = track.points[(i + 1) % n_target];
    Vec2 t = next - prev;
    const double len = t.norm();
    if (len < 1e-12) {
      throw InvalidTrackError("degenerate tangent at index " + std::to_string(i));
    }
    t /= len;
    track.tangent[i] = t;
    track.normal[i] = right_normal(t);
  }
  return track;
}

TrackModel load_track(const std::string& path, double resample_step) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  std::string line;
  std::size_t line_no = 0;
  // Header row is mandatory so a stray data file is rejected loudly.
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  ++line_no;
  {
    std::string header = trim(line);
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](char c) { return c == ' ' || c == '\t'; }),
                 header.end());
    if (header != "x,y,w_left,w_right") {
      throw ParseError(path + ":1: expected header 'x,y,w_left,w_right', got '" + trim(line) +
                       "'");
    }
  }

  std::vector<Vec2> pts;
  std::vector<double> wl;
  std::vector<double> wr;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    const double x = parse_double(fields[0], path, line_no);
    const double y = parse_double(fields[1], path, line_no);
    const double wleft = parse_double(fields[2], path, line_no);
    const double wright = parse_double(fields[3], path, line_no);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(wleft) || !std::isfinite(wright)) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
    }
    pts.emplace_back(x, y);
    wl.push_back(wleft);
    wr.push_back(wright);
  }
  return build_track(pts, wl, wr, resample_step);
}

LocateResult locate(const TrackModel& track, const Vec2& position, std::size_t hint) {
  const std::size_t n = track.size();
  if (n == 0) throw ContractError("locate on empty track");

  auto scan = [&](std::size_t lo, std::size_t count) {
    std::size_t best = lo % n;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = (lo + k) % n;
      const double d2 = (position - track.points[i]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    return best;
  };

  std::size_t best;
  constexpr std::size_t kWindow = 25;
  if (hint < n && n > 2 * kWindow + 1) {
    best = scan(hint + n - kWindow, 2 * kWindow + 1);
    // A hit at the window edge means the true minimum may lie outside it.
    const std::size_t off = (best + n - (hint + n - kWindow) % n) % n;
    if (off == 0 || off == 2 * kWindow) best = scan(0, n);
  } else {
    best = scan(0, n);
  }

  const Vec2 rel = position - track.points[best];
  // Continuous arc-length coordinate: project onto the local tangent (at most
  // half a sample spacing each way) so slow motion between samples still
  // advances s, then wrap into [0, L).
  const double half_step = 0.5 * track.total_length / static_cast<double>(n);
  double s = track.s[best] + std::clamp(rel.dot(track.tangent[best]), -half_step, half_step);
  if (s >= track.total_length) s -= track.total_length;
  if (s < 0.0) s += track.total_length;
  return LocateResult{best, s, rel.dot(track.normal[best])};
}

double progress_delta(const TrackModel& track, double s_prev, double s_now) {
  const double L = track.total_length;
  double d = std::fmod(s_now - s_prev, L);
  if (d <= -0.5 * L) d += L;
  if (d > 0.5 * L) d -= L;
  return d;
}

}  // namespace apexrl
