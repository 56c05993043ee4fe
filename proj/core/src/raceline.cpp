#include "apexrl/raceline.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>

#include "apexrl/errors.hpp"
#include "apexrl/runio.hpp"

namespace apexrl {
namespace {

constexpr double kKappaFloor = 1e-4;  // prevents sqrt(mu*g/0) on straights
constexpr double kGradStep = 1e-4;    // central-difference step, meters

double kappa_at(const std::vector<Vec2>& pts, std::size_t j) {
  const std::size_t n = pts.size();
  const Vec2& prev = pts[(j + n - 1) % n];
  const Vec2& next = pts[(j + 1) % n];
  const Vec2 d1 = 0.5 * (next - prev);
  const Vec2 d2 = next - 2.0 * pts[j] + prev;
  const double speed = d1.norm();
  return cross2(d1, d2) / (speed * speed * speed);
}

double objective(const std::vector<double>& kappa) {
  double f = 0.0;
  for (double k : kappa) f += k * k;
  return f;
}

}  // namespace

void GGVParams::validate() const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!pos(mu) || !pos(g) || !pos(a_acc_max) || !pos(a_brk_max) || !pos(u_cap)) {
    throw ConfigError("GGV parameters must be strictly positive and finite");
  }
}

RacingLine solve_mcrl(const TrackModel& track, double w_veh, double epsilon, int max_iters) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  const std::size_t n = track.size();

  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -track.w_left[i] + 0.5 * w_veh;
    hi[i] = track.w_right[i] - 0.5 * w_veh;
    if (lo[i] > hi[i]) {
      throw InfeasibleCorridorError(
          "corridor narrower than the vehicle at waypoint " + std::to_string(i), i);
    }
  }
  auto project = [&](std::vector<double>& sig) {
    for (std::size_t i = 0; i < n; ++i) sig[i] = std::clamp(sig[i], lo[i], hi[i]);
  };

  std::vector<double> sigma(n, 0.0);
  project(sigma);
  auto offset_points = [&](const std::vector<double>& sig) {
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = track.points[i] + sig[i] * track.normal[i];
    return pts;
  };

  std::vector<Vec2> pts = offset_points(sigma);
  std::vector<double> kappa = discrete_curvature(pts);
  double f = objective(kappa);

  RacingLine line;
  line.objective_history.push_back(f);

  // Moving point i only touches kappa_{i-1}, kappa_i, kappa_{i+1}, so the
  // curvature Jacobian is tridiagonal-cyclic. Six local curvature evaluations
  // per coordinate give its bands by central differences, and the exact
  // objective gradient is 2 J^T kappa.
  std::vector<double> Jm(n), Jd(n), Jp(n);  // d kappa_{i-1|i|i+1} / d sigma_i
  auto compute_jacobian = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 saved = pts[i];
      pts[i] = track.points[i] + (sigma[i] + kGradStep) * track.normal[i];
      const double kp_m = kappa_at(pts, (i + n - 1) % n);
      const double kp_0 = kappa_at(pts, i);
      const double kp_p = kappa_at(pts, (i + 1) % n);
      pts[i] = track.points[i] + (sigma[i] - kGradStep) * track.normal[i];
      const double km_m = kappa_at(pts, (i + n - 1) % n);
      const double km_0 = kappa_at(pts, i);
      const double km_p = kappa_at(pts, (i + 1) % n);
      pts[i] = saved;
      Jm[i] = (kp_m - km_m) / (2.0 * kGradStep);
      Jd[i] = (kp_0 - km_0) / (2.0 * kGradStep);
      Jp[i] = (kp_p - km_p) / (2.0 * kGradStep);
    }
  };

  // Damped Gauss-Newton on the linearized curvature (the iterative scheme the
  // minimum-curvature literature uses), projected onto the box. Plain
  // steepest descent stalls here: the Gauss-Newton matrix 2 J^T J is a
  // fourth-difference operator whose smooth modes carry almost no gradient,
  // while curvature discretization noise dominates the high-frequency end.
  // The damping mu plays the line-search role: a rejected candidate raises mu
  // (shortening the step toward the gradient), an accepted one lowers it, and
  // the objective decreases strictly across accepted iterates.
  Eigen::VectorXd g(n);
  Eigen::SparseMatrix<double> M(static_cast<int>(n), static_cast<int>(n));
  std::vector<Eigen::Triplet<double>> trips;
  double mu = -1.0;  // initialized from the first iteration's diagonal scale

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    compute_jacobian();
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double km = kappa[(i + n - 1) % n];
      const double kp = kappa[(i + 1) % n];
      g[static_cast<int>(i)] = 2.0 * (km * Jm[i] + kappa[i] * Jd[i] + kp * Jp[i]);
      gmax = std::max(gmax, std::abs(g[static_cast<int>(i)]));
    }
    if (gmax < 1e-18) {
      line.converged = true;  // flat objective: nothing can change
      line.final_kappa_delta = 0.0;
      break;
    }

    trips.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const int col = static_cast<int>(i);
      trips.emplace_back(static_cast<int>((i + n - 1) % n), col, Jm[i]);
      trips.emplace_back(col, col, Jd[i]);
      trips.emplace_back(static_cast<int>((i + 1) % n), col, Jp[i]);
    }
    Eigen::SparseMatrix<double> J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(trips.begin(), trips.end());
    M = 2.0 * Eigen::SparseMatrix<double>(J.transpose() * J);
    const double diag_scale = M.diagonal().mean();
    const double mu_min = 1e-10 * diag_scale;
    const double mu_max = 1e8 * diag_scale;
    // Start at the floor: near-Newton trial steps first, so smooth
    // low-gradient modes (whole-line shifts) move before the kappa-delta stop
    // criterion can trigger on noise-sized corrections.
    if (mu < 0.0) mu = mu_min;
    mu = std::clamp(mu, mu_min, mu_max);

    bool accepted = false;
    std::vector<double> cand_sigma(n);
    std::vector<Vec2> cand_pts;
    std::vector<double> cand_kappa;
    double cand_f = 0.0;
    while (mu <= mu_max) {
      Eigen::SparseMatrix<double> M_mu = M;
      for (int k = 0; k < static_cast<int>(n); ++k) M_mu.coeffRef(k, k) += mu;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M_mu);
      if (ldlt.info() == Eigen::Success) {
        const Eigen::VectorXd d = ldlt.solve(-g);
        for (std::size_t i = 0; i < n; ++i) cand_sigma[i] = sigma[i] + d[static_cast<int>(i)];
        project(cand_sigma);
        bool usable = true;
        try {
          cand_pts = offset_points(cand_sigma);
          cand_kappa = discrete_curvature(cand_pts);
          cand_f = objective(cand_kappa);
        } catch (const InvalidTrackError&) {
          usable = false;  // step folded the line onto itself; damp harder
        }
        if (usable && cand_f < f) {
          accepted = true;
          mu = std::max(mu / 8.0, mu_min);
          break;
        }
      }
      mu *= 4.0;
    }
    if (!accepted) {
      // No descent even at gradient-like steps: the iterate is stationary, so
      // the curvature change between iterations is zero and the stop
      // criterion holds trivially.
      line.converged = true;
      line.final_kappa_delta = 0.0;
      break;
    }

    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(cand_kappa[i] - kappa[i]));
    sigma.swap(cand_sigma);
    pts.swap(cand_pts);
    kappa.swap(cand_kappa);
    f = cand_f;
    line.objective_history.push_back(f);
    line.final_kappa_delta = delta;
    if (delta <= epsilon) {
      line.converged = true;
      ++iter;
      break;
    }
  }
  line.iterations = iter;

  line.records.resize(n);
  line.sigma = sigma;
  line.source_track = &track;
  line.ds = track.total_length / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 t = pts[(i + 1) % n] - pts[(i + n - 1) % n];
    RacingLineRecord& r = line.records[i];
    r.s = track.s[i];
    r.x = pts[i].x();
    r.y = pts[i].y();
    r.phi = std::atan2(t.y(), t.x());
    r.kappa = kappa[i];
    r.u_ref = 0.0;
  }
  return line;
}

void speed_profile(RacingLine& line, const GGVParams& ggv) {
  ggv.validate();
  const std::size_t n = line.size();
  if (n == 0) throw ContractError("speed_profile on an empty racing line");
  const double ds = line.ds;
  const double a_lat = ggv.a_lat_max();

  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::max(std::abs(line.records[i].kappa), kKappaFloor);
    u[i] = std::min(ggv.u_cap, std::sqrt(a_lat / k));
  }

  // Remaining longitudinal capability on the friction circle at speed ui
  // through curvature ki, capped by the actuator limit.
  auto coupled = [&](double cap, double ui, double ki) {
    const double lat = ui * ui * ki;
    return std::min(cap, std::sqrt(std::max(0.0, a_lat * a_lat - lat * lat)));
  };

  // Forward (drive) pass, twice around so the result is start-independent.
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const std::size_t i = k % n;
    const std::size_t j = (i + 1) % n;
    const double a = coupled(ggv.a_acc_max, u[i], line.records[i].kappa);
    u[j] = std::min(u[j], std::sqrt(u[i] * u[i] + 2.0 * a * ds));
  }
  // Backward (brake) pass, twice around.
  for (std::size_t k = 2 * n; k-- > 0;) {
    const std::size_t i = k % n;
    const std::size_t j = (i + 1) % n;
    const double a = coupled(ggv.a_brk_max, u[j], line.records[j].kappa);
    u[i] = std::min(u[i], std::sqrt(u[j] * u[j] + 2.0 * a * ds));
  }

  for (std::size_t i = 0; i < n; ++i) line.records[i].u_ref = u[i];
}

RacingLineRecord lookahead(const RacingLine& line, double s_now, double u_now, double k_preview,
                           double L_min, double L_max) {
  const std::size_t n = line.size();
  if (n == 0) throw ContractError("lookahead on an empty racing line");
  if (line.records[0].u_ref <= 0.0) throw ContractError("lookahead before speed_profile");

  const double L = line.ds * static_cast<double>(n);
  const double dist = std::clamp(k_preview * u_now, L_min, L_max);
  double s_t = std::fmod(s_now + dist, L);
  if (s_t < 0.0) s_t += L;

  const double pos = s_t / line.ds;
  const auto i0 = static_cast<std::size_t>(pos) % n;
  const std::size_t i1 = (i0 + 1) % n;
  const double t = pos - std::floor(pos);
  const RacingLineRecord& a = line.records[i0];
  const RacingLineRecord& b = line.records[i1];

  RacingLineRecord out;
  out.s = s_t;
  out.x = (1.0 - t) * a.x + t * b.x;
  out.y = (1.0 - t) * a.y + t * b.y;
  out.kappa = (1.0 - t) * a.kappa + t * b.kappa;
  out.u_ref = (1.0 - t) * a.u_ref + t * b.u_ref;
  out.phi = wrap_angle(a.phi + t * wrap_angle(b.phi - a.phi));
  return out;
}

LocateResult locate_line(const RacingLine& line, const Vec2& position, std::size_t hint) {
  const std::size_t n = line.size();
  if (n == 0) throw ContractError("locate_line on an empty racing line");

  auto scan = [&](std::size_t lo, std::size_t count) {
    std::size_t best = lo % n;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = (lo + k) % n;
      const double d2 = (position - line.point(i)).squaredNorm();
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
    const std::size_t off = (best + n - (hint + n - kWindow) % n) % n;
    if (off == 0 || off == 2 * kWindow) best = scan(0, n);
  } else {
    best = scan(0, n);
  }

  const RacingLineRecord& r = line.records[best];
  const Vec2 normal(std::sin(r.phi), -std::cos(r.phi));  // right of travel
  return LocateResult{best, r.s, (position - line.point(best)).dot(normal)};
}

void write_raceline_csv(const std::string& path, const RacingLine& line) {
  CsvWriter csv(path, {"s", "x", "y", "phi", "kappa", "u_ref"});
  for (const RacingLineRecord& r : line.records) {
    csv.row({fmt(r.s), fmt(r.x), fmt(r.y), fmt(r.phi), fmt(r.kappa), fmt(r.u_ref)});
  }
}

}  // namespace apexrl
