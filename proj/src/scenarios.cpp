#include "edtsc/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edtsc/config.hpp"

namespace edtsc {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Linear interpolation of the curvature profile at arc length s.
double kappa_at(const std::vector<CurvPoint>& prof, double s) {
  if (s <= prof.front().s) return prof.front().kappa;
  if (s >= prof.back().s) return prof.back().kappa;
  for (std::size_t i = 1; i < prof.size(); ++i) {
    if (s <= prof[i].s) {
      const double t = (s - prof[i - 1].s) / (prof[i].s - prof[i - 1].s);
      return lerp(prof[i - 1].kappa, prof[i].kappa, t);
    }
  }
  return prof.back().kappa;
}

double sq(double v) { return v * v; }

}  // namespace

std::vector<CurvPoint> default_track_profile() {
  // Hold/ramp breakpoints: launch straight, then right R=20, left R=40 and
  // right R=80 corners separated by straights, with 3 m curvature ramps.
  return {
      {0.0, 0.0},      {25.0, 0.0},      {28.0, 0.05},    {63.4, 0.05},
      {66.4, 0.0},     {98.4, 0.0},      {101.4, -0.025}, {154.3, -0.025},
      {157.3, 0.0},    {199.3, 0.0},     {202.3, 0.0125}, {262.1, 0.0125},
      {265.1, 0.0},    {312.1, 0.0},
  };
}

std::vector<CurvPoint> parse_track_profile(const std::string& text,
                                           const std::string& origin) {
  std::vector<CurvPoint> prof;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string body = line.substr(first, last - first + 1);
    if (!header_seen) {
      if (body != "s_m,kappa_1pm") {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected header 's_m,kappa_1pm'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = body.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 's,kappa' row");
    }
    CurvPoint p{};
    std::size_t used = 0;
    try {
      p.s = std::stod(body.substr(0, comma), &used);
      p.kappa = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": malformed number in '" + body + "'");
    }
    if (!std::isfinite(p.s) || !std::isfinite(p.kappa)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": non-finite value");
    }
    if (!prof.empty() && p.s <= prof.back().s) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": arc length must be strictly increasing");
    }
    prof.push_back(p);
  }
  if (prof.size() < 2) {
    throw ConfigError(origin + ": curvature profile needs at least two rows");
  }
  if (prof.front().s != 0.0) {
    throw ConfigError(origin + ": curvature profile must start at s = 0");
  }
  return prof;
}

std::vector<CurvPoint> load_track_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open track profile '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_track_profile(buf.str(), path);
}

RefPath RefPath::from_curvature(const std::vector<CurvPoint>& profile,
                                double ds) {
  if (ds <= 0.0) {
    throw ConfigError("path sample spacing must be positive");
  }
  RefPath path;
  const double total = profile.back().s;
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  path.pts_.push_back({0.0, 0.0, 0.0, 0.0, kappa_at(profile, 0.0), 0.0});
  while (s < total) {
    const double step = std::min(ds, total - s);
    const double k0 = kappa_at(profile, s);
    const double k1 = kappa_at(profile, s + step);
    const double psi_next = psi + step * 0.5 * (k0 + k1);
    const double psi_mid = 0.5 * (psi + psi_next);
    x += step * std::cos(psi_mid);
    y += step * std::sin(psi_mid);
    psi = psi_next;
    s += step;
    path.pts_.push_back({s, x, y, psi, kappa_at(profile, s), 0.0});
  }
  return path;
}

RefPath RefPath::from_lane_change(double settle_m,
                                  const std::vector<double>& sections_m,
                                  double scale, double offset_m, double tail_m,
                                  double ds, double weave_amp_m,
                                  double weave_len_m) {
  if (sections_m.size() != 5) {
    throw ConfigError("lane-change geometry needs exactly five sections");
  }
  for (double sec : sections_m) {
    if (sec <= 0.0) throw ConfigError("lane-change sections must be positive");
  }
  if (settle_m < 0.0 || tail_m < 0.0 || scale <= 0.0 || ds <= 0.0) {
    throw ConfigError("lane-change geometry parameters out of range");
  }
  if (weave_amp_m < 0.0 || weave_len_m < 0.0 ||
      (weave_amp_m > 0.0 && weave_len_m <= 0.0)) {
    throw ConfigError("lane-change weave parameters out of range");
  }
  const double weave_m = weave_amp_m > 0.0 ? weave_len_m * scale : 0.0;
  // Section boundaries measured from the end of the approach straight.
  double b[6] = {0.0};
  for (int i = 0; i < 5; ++i) b[i + 1] = b[i] + sections_m[i] * scale;
  const double x_total = weave_m + settle_m + b[5] + tail_m;
  const double l_out = sections_m[1] * scale;   // outbound blend length
  const double l_back = sections_m[3] * scale;  // return blend length

  auto offset_and_slope = [&](double x) {
    const double u = x - weave_m - settle_m;
    double yr = 0.0;
    double dyr = 0.0;
    double ddyr = 0.0;
    if (weave_m > 0.0 && x < weave_m) {
      // Out-and-back sway: two cosine blends, +amp over the first half and
      // back to centre over the second, matching the maneuver's blend shape.
      const double half = 0.5 * weave_m;
      const double t = (x < half ? x : x - half) / half;
      const double sign = x < half ? 1.0 : -1.0;
      const double base = x < half ? 0.0 : weave_amp_m;
      yr = base + sign * weave_amp_m * 0.5 * (1.0 - std::cos(kPi * t));
      dyr = sign * weave_amp_m * 0.5 * (kPi / half) * std::sin(kPi * t);
      ddyr = sign * weave_amp_m * 0.5 * sq(kPi / half) * std::cos(kPi * t);
    } else if (u > b[1] && u < b[2]) {
      const double t = (u - b[1]) / l_out;
      yr = offset_m * 0.5 * (1.0 - std::cos(kPi * t));
      dyr = offset_m * 0.5 * (kPi / l_out) * std::sin(kPi * t);
      ddyr = offset_m * 0.5 * sq(kPi / l_out) * std::cos(kPi * t);
    } else if (u >= b[2] && u <= b[3]) {
      yr = offset_m;
    } else if (u > b[3] && u < b[4]) {
      const double t = (u - b[3]) / l_back;
      yr = offset_m * 0.5 * (1.0 + std::cos(kPi * t));
      dyr = -offset_m * 0.5 * (kPi / l_back) * std::sin(kPi * t);
      ddyr = -offset_m * 0.5 * sq(kPi / l_back) * std::cos(kPi * t);
    }
    struct R {
      double y, dy, ddy;
    };
    return R{yr, dyr, ddyr};
  };

  RefPath path;
  double s = 0.0;
  double prev_x = 0.0;
  double prev_y = 0.0;
  for (double x = 0.0; x <= x_total + 0.5 * ds; x += ds) {
    const auto r = offset_and_slope(std::min(x, x_total));
    if (!path.pts_.empty()) {
      s += std::hypot(x - prev_x, r.y - prev_y);
    }
    const double kappa = r.ddy / std::pow(1.0 + r.dy * r.dy, 1.5);
    path.pts_.push_back(
        {s, std::min(x, x_total), r.y, std::atan(r.dy), kappa, 0.0});
    prev_x = std::min(x, x_total);
    prev_y = r.y;
  }
  return path;
}

void RefPath::plan_speeds(double v_cap, double a_lat_max, double a_coast) {
  if (pts_.empty()) return;
  for (auto& p : pts_) {
    const double k = std::max(std::abs(p.kappa), 1e-6);
    p.v_plan = std::min(v_cap, std::sqrt(a_lat_max / k));
  }
  for (std::size_t i = pts_.size() - 1; i-- > 0;) {
    const double gap = pts_[i + 1].s - pts_[i].s;
    const double reachable =
        std::sqrt(sq(pts_[i + 1].v_plan) + 2.0 * a_coast * gap);
    pts_[i].v_plan = std::min(pts_[i].v_plan, reachable);
  }
}

const PathPoint& RefPath::advance_nearest(double x, double y) {
  auto d2 = [&](std::size_t i) {
    return sq(pts_[i].x - x) + sq(pts_[i].y - y);
  };
  while (idx_ + 1 < pts_.size() && d2(idx_ + 1) <= d2(idx_)) ++idx_;
  // Continuous progress: project the query point onto the segments adjacent
  // to the nearest sample. Progress that only moves in whole samples makes
  // everything derived from it (lookahead target, hence steering) staircase
  // at the sample-crossing rate.
  const std::size_t lo = idx_ > 0 ? idx_ - 1 : idx_;
  const std::size_t hi = idx_ + 1 < pts_.size() ? idx_ + 1 : idx_;
  double best_s = pts_[idx_].s;
  double best_d2 = d2(idx_);
  for (std::size_t i = lo; i < hi; ++i) {
    const PathPoint& a = pts_[i];
    const PathPoint& b = pts_[i + 1];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    if (len2 <= 0.0) continue;
    const double t = clamp(((x - a.x) * ex + (y - a.y) * ey) / len2, 0.0, 1.0);
    const double px = a.x + t * ex;
    const double py = a.y + t * ey;
    const double dd = sq(px - x) + sq(py - y);
    if (dd < best_d2) {
      best_d2 = dd;
      best_s = a.s + t * (b.s - a.s);
    }
  }
  s_proj_ = std::max(s_proj_, best_s);  // the walker never moves backwards
  return pts_[idx_];
}

PathPoint RefPath::lookahead_from_nearest(double dist) const {
  const double s_target = s_proj_ + dist;
  std::size_t j = idx_;
  while (j + 1 < pts_.size() && pts_[j].s < s_target) ++j;
  if (j == 0 || pts_[j].s <= s_target) return pts_[j];
  // Interpolate between samples: a target that snaps from sample to sample
  // makes the steering command staircase at the sample-crossing rate, and
  // the yaw-rate reference (an instantaneous map of the steer angle) would
  // staircase with it.
  const PathPoint& a = pts_[j - 1];
  const PathPoint& b = pts_[j];
  const double span = b.s - a.s;
  if (span <= 0.0) return b;
  const double t = (s_target - a.s) / span;
  PathPoint out;
  out.s = s_target;
  out.x = lerp(a.x, b.x, t);
  out.y = lerp(a.y, b.y, t);
  out.psi = lerp(a.psi, b.psi, t);
  out.kappa = lerp(a.kappa, b.kappa, t);
  out.v_plan = lerp(a.v_plan, b.v_plan, t);
  return out;
}

double RefPath::progress() const {
  return pts_.empty() ? 0.0 : s_proj_;
}

double RefPath::lateral_offset_at_x(double x) const {
  if (pts_.empty()) return 0.0;
  if (x <= pts_.front().x) return pts_.front().y;
  if (x >= pts_.back().x) return pts_.back().y;
  std::size_t lo = 0;
  std::size_t hi = pts_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (pts_[mid].x <= x ? lo : hi) = mid;
  }
  const double span = pts_[hi].x - pts_[lo].x;
  if (span <= 0.0) return pts_[lo].y;
  return lerp(pts_[lo].y, pts_[hi].y, (x - pts_[lo].x) / span);
}

DriverParams driver_params_from(const Config& cfg) {
  DriverParams dp;
  dp.lookahead_base = cfg.get_double("driver.lookahead_base", dp.lookahead_base);
  dp.lookahead_gain = cfg.get_double("driver.lookahead_gain", dp.lookahead_gain);
  dp.a_lat_max = cfg.get_double("driver.a_lat_max", dp.a_lat_max);
  dp.a_coast = cfg.get_double("driver.a_coast", dp.a_coast);
  dp.v_kp = cfg.get_double("driver.v_kp", dp.v_kp);
  dp.v_ki = cfg.get_double("driver.v_ki", dp.v_ki);
  dp.v_ff = cfg.get_double("driver.v_ff", dp.v_ff);
  dp.throttle_slew = cfg.get_double("driver.throttle_slew", dp.throttle_slew);
  dp.delta_max = cfg.get_double("driver.delta_max", dp.delta_max);
  dp.delta_slew = cfg.get_double("driver.delta_slew", dp.delta_slew);
  if (dp.lookahead_base <= 0.0 || dp.a_lat_max <= 0.0 || dp.a_coast <= 0.0 ||
      dp.delta_max <= 0.0 || dp.throttle_slew <= 0.0 || dp.delta_slew <= 0.0) {
    throw ConfigError("driver parameters must be positive");
  }
  if (dp.v_ff < 0.0) {
    throw ConfigError("driver.v_ff must be non-negative");
  }
  return dp;
}

ScenarioParams scenario_params_from(const Config& cfg) {
  ScenarioParams sp;
  sp.track_ds = cfg.get_double("scenario.track_ds", sp.track_ds);
  sp.track_file = cfg.get_string("scenario.track_file", sp.track_file);
  sp.dlc_offset_m = cfg.get_double("scenario.dlc_offset_m", sp.dlc_offset_m);
  sp.dlc_sections_m =
      cfg.get_doubles("scenario.dlc_sections_m", sp.dlc_sections_m);
  sp.dlc_v_ref_kmh = cfg.get_double("scenario.dlc_v_ref_kmh", sp.dlc_v_ref_kmh);
  sp.dlc_settle_m = cfg.get_double("scenario.dlc_settle_m", sp.dlc_settle_m);
  sp.dlc_tail_m = cfg.get_double("scenario.dlc_tail_m", sp.dlc_tail_m);
  sp.dlc_lane_slack_m =
      cfg.get_double("scenario.dlc_lane_slack_m", sp.dlc_lane_slack_m);
  sp.dlc_weave_amp_m =
      cfg.get_double("scenario.dlc_weave_amp_m", sp.dlc_weave_amp_m);
  sp.dlc_weave_len_m =
      cfg.get_double("scenario.dlc_weave_len_m", sp.dlc_weave_len_m);
  if (sp.track_ds <= 0.0 || sp.dlc_v_ref_kmh <= 0.0 ||
      sp.dlc_lane_slack_m <= 0.0) {
    throw ConfigError("scenario parameters out of range");
  }
  if (sp.dlc_weave_amp_m < 0.0 || sp.dlc_weave_len_m < 0.0) {
    throw ConfigError("scenario parameters out of range");
  }
  if (sp.dlc_sections_m.size() != 5) {
    throw ConfigError("scenario.dlc_sections_m needs exactly five lengths");
  }
  return sp;
}

PathFollower::PathFollower(RefPath path, Mode mode, const DriverParams& dp,
                           double wheelbase, double coast_from_x, double end_x)
    : path_(std::move(path)),
      mode_(mode),
      dp_(dp),
      coast_from_x_(coast_from_x),
      end_x_(end_x) {
  throttle_pid_.kp = dp.v_kp;
  throttle_pid_.ki = dp.v_ki;
  throttle_pid_.out_lo = 0.0;
  throttle_pid_.out_hi = 1.0;
  wheelbase_ = wheelbase;
}

DriverCommand PathFollower::step(const VehicleState& s, double dt) {
  DriverCommand cmd;
  const PathPoint& near = path_.advance_nearest(s.x, s.y);

  // Pure pursuit: aim at a point one lookahead distance further along the
  // path and steer onto the circle through it.
  const double ld =
      dp_.lookahead_base + dp_.lookahead_gain * std::max(s.v, 0.0);
  const PathPoint& target = path_.lookahead_from_nearest(ld);
  const double dx = target.x - s.x;
  const double dy = target.y - s.y;
  const double xb = std::cos(s.psi) * dx + std::sin(s.psi) * dy;
  const double yb = -std::sin(s.psi) * dx + std::cos(s.psi) * dy;
  const double d2 = std::max(xb * xb + yb * yb, 0.25);
  const double delta_raw =
      std::atan(wheelbase_ * 2.0 * yb / d2);
  double delta_cmd = clamp(delta_raw, -dp_.delta_max, dp_.delta_max);
  if (!primed_) {
    delta_ = delta_cmd;
  } else {
    delta_ = clamp(delta_cmd, delta_ - dp_.delta_slew * dt,
                   delta_ + dp_.delta_slew * dt);
  }
  cmd.delta = delta_;

  const bool coasting = mode_ == Mode::kLaneChange && s.x >= coast_from_x_;
  if (coasting) {
    cmd.coast = true;
    cmd.t_dem = 0.0;
    throttle_ = 0.0;
  } else {
    const double t_raw =
        clamp(dp_.v_ff * near.v_plan + throttle_pid_.step(near.v_plan - s.v, dt),
              0.0, 1.0);
    if (!primed_) {
      throttle_ = t_raw;  // rolling start: the pedal is already applied
    } else {
      throttle_ = clamp(t_raw, throttle_ - dp_.throttle_slew * dt,
                        throttle_ + dp_.throttle_slew * dt);
    }
    cmd.t_dem = throttle_;
  }
  primed_ = true;

  if (mode_ == Mode::kTrack) {
    cmd.done = path_.progress() >= path_.length() - 1.0;
  } else {
    cmd.done = s.x >= end_x_;
  }
  return cmd;
}

ScenarioSetup make_track_scenario(double speed_kmh, const ScenarioParams& sp,
                                  const DriverParams& dp,
                                  const VehicleParams& vp) {
  if (speed_kmh <= 0.0) {
    throw ConfigError("track scenario needs a positive target speed");
  }
  const auto profile = sp.track_file.empty()
                           ? default_track_profile()
                           : load_track_profile(sp.track_file);
  RefPath path = RefPath::from_curvature(profile, sp.track_ds);
  const double v_cap = speed_kmh / 3.6;
  path.plan_speeds(v_cap, dp.a_lat_max, dp.a_coast);
  const double length = path.length();
  const PathPoint start = path.points().front();

  VehicleState init{};
  init.x = start.x;
  init.y = start.y;
  init.psi = start.psi;
  init.v = std::min(3.0, v_cap);
  init.u = 0.0;
  init.gamma = 0.0;
  init.omega_rl = init.v / vp.r;
  init.omega_rr = init.v / vp.r;

  ScenarioSetup setup{
      PathFollower(std::move(path), PathFollower::Mode::kTrack, dp,
                   vp.L(), 0.0, 0.0),
      init, length / std::max(2.0, 0.4 * v_cap) + 15.0};
  return setup;
}

ScenarioSetup make_lane_change_scenario(double speed_kmh,
                                        const ScenarioParams& sp,
                                        const DriverParams& dp,
                                        const VehicleParams& vp) {
  if (speed_kmh <= 0.0) {
    throw ConfigError("lane-change scenario needs a positive test speed");
  }
  const double scale = std::max(speed_kmh / sp.dlc_v_ref_kmh, 0.5);
  RefPath path = RefPath::from_lane_change(
      sp.dlc_settle_m, sp.dlc_sections_m, scale, sp.dlc_offset_m,
      sp.dlc_tail_m, 0.5, sp.dlc_weave_amp_m, sp.dlc_weave_len_m);
  const double v_set = speed_kmh / 3.6;
  // Speed planning is only used through the approach; keep the test speed
  // everywhere so the throttle holds it right up to the release point.
  path.plan_speeds(v_set, 1e9, 1e9);
  const double end_x = path.points().back().x - 1.0;
  // Accelerator release point: end of the approach straight, i.e. past the
  // estimator-settling sway (when present) plus the settle distance.
  const double release_x =
      (sp.dlc_weave_amp_m > 0.0 ? sp.dlc_weave_len_m * scale : 0.0) +
      sp.dlc_settle_m;

  VehicleState init{};
  init.v = v_set;
  init.omega_rl = v_set / vp.r;
  init.omega_rr = v_set / vp.r;

  ScenarioSetup setup{
      PathFollower(std::move(path), PathFollower::Mode::kLaneChange, dp,
                   vp.L(), release_x, end_x),
      init, 3.0 * end_x / v_set + 8.0};
  return setup;
}

}  // namespace edtsc
