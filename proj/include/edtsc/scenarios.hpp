#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "edtsc/math_util.hpp"
#include "edtsc/plant.hpp"

namespace edtsc {

class Config;

// Curvature breakpoint: kappa varies piecewise-linearly in arc length between
// breakpoints. Positive kappa bends the path to the right (y increases).
struct CurvPoint {
  double s;      // arc length from path start [m]
  double kappa;  // path curvature [1/m]
};

// Built-in closed-course style test track: a launch straight followed by
// alternating-direction corners of increasing radius joined by short
// curvature ramps, so corner-entry speed can be shed by drag and command
// cut alone.
std::vector<CurvPoint> default_track_profile();

// Parse a curvature profile from CSV text with header "s_m,kappa_1pm".
// Breakpoints must start at s = 0 and be strictly increasing in s.
std::vector<CurvPoint> parse_track_profile(const std::string& text,
                                           const std::string& origin);
std::vector<CurvPoint> load_track_profile(const std::string& path);

// One sample of a reference path, with the planned corner speed attached.
struct PathPoint {
  double s;       // arc length [m]
  double x;       // world position [m]
  double y;       // world position [m]
  double psi;     // path heading [rad]
  double kappa;   // curvature [1/m]
  double v_plan;  // planned speed at this point [m/s]
};

// Sampled reference path with a monotone nearest-point walker for followers.
class RefPath {
 public:
  // Integrate a curvature profile into world coordinates from the origin at
  // heading zero, sampling every ds metres of arc length.
  static RefPath from_curvature(const std::vector<CurvPoint>& profile,
                                double ds);
  // Double-lane-change path: straight approach, cosine offset ramp out to the
  // side lane, hold, cosine ramp back, exit straight. Section lengths scale
  // with test speed so the lateral-acceleration demand stays speed-invariant.
  // A positive weave amplitude prepends a gentle out-and-back sway (over
  // weave_len_m, also scaled) ahead of the approach straight. A straight
  // approach carries no lateral excitation at all, so the cornering-stiffness
  // estimate would otherwise still sit at its prior when the maneuver starts;
  // the sway gives the estimator a stretch of mild, linear-range cornering to
  // settle on before anything depends on it.
  static RefPath from_lane_change(double settle_m,
                                  const std::vector<double>& sections_m,
                                  double scale, double offset_m, double tail_m,
                                  double ds, double weave_amp_m = 0.0,
                                  double weave_len_m = 0.0);

  // Cap speeds by lateral acceleration in corners, then sweep backwards so a
  // follower that can shed at most a_coast of speed per metre never arrives
  // at a corner too fast.
  void plan_speeds(double v_cap, double a_lat_max, double a_coast);

  const std::vector<PathPoint>& points() const { return pts_; }
  double length() const { return pts_.empty() ? 0.0 : pts_.back().s; }

  // Advance the internal progress index to the point nearest (x, y). The
  // walker only moves forward, so loops in the path cannot drag it backwards.
  const PathPoint& advance_nearest(double x, double y);
  // Target point one `dist` of arc length past the current progress point,
  // interpolated between samples so follower commands stay smooth.
  PathPoint lookahead_from_nearest(double dist) const;
  double progress() const;
  void reset_progress() {
    idx_ = 0;
    s_proj_ = 0.0;
  }

  // Lane-change reference offset for the current x (y of the nearest sample).
  double lateral_offset_at_x(double x) const;

 private:
  std::vector<PathPoint> pts_;
  std::size_t idx_ = 0;
  double s_proj_ = 0.0;  // continuous arc-length progress
};

// Path follower behaviour knobs.
struct DriverParams {
  double lookahead_base = 2.0;   // [m]
  double lookahead_gain = 0.35;  // [s] extra lookahead per unit speed
  double a_lat_max = 8.0;        // corner speed cap [m/s^2]
  double a_coast = 2.0;          // assumed shed rate for corner entry [m/s^2]
  double v_kp = 0.25;            // throttle proportional gain [1/(m/s)]
  double v_ki = 0.08;            // throttle integral gain [1/(m s)]
  double v_ff = 0.0145;          // throttle per planned m/s: the fraction of
                                 // full command that matches back-EMF at that
                                 // speed, so the PI only trims drag and
                                 // transients
  double throttle_slew = 1.2;    // throttle rate limit [1/s]
  double delta_max = 0.6;        // steering clamp [rad]
  double delta_slew = 3.0;       // steering rate limit [rad/s]
};

DriverParams driver_params_from(const Config& cfg);

// Geometry and gating knobs for the built-in scenarios.
struct ScenarioParams {
  double track_ds = 0.5;             // path sample spacing [m]
  std::string track_file;            // optional curvature CSV; empty = builtin
  double dlc_offset_m = -2.9;        // side-lane offset (negative = left) [m]:
                                     // 1 m plus half of each lane width, with
                                     // the lane widths following the published
                                     // obstacle-avoidance test formulas
                                     // (1.1*w + 0.25 and w + 1) for this
                                     // vehicle's 1.2 m track
  std::vector<double> dlc_sections_m = {12.0, 13.5, 11.0, 12.5, 12.0};
  double dlc_v_ref_kmh = 40.0;       // speed the base section lengths suit
  double dlc_settle_m = 15.0;        // straight approach before the maneuver
  double dlc_tail_m = 12.0;          // straight run-out after the maneuver
  double dlc_lane_slack_m = 1.2;     // allowed deviation from the lane centre
  double dlc_weave_amp_m = 0.3;      // estimator-settling sway amplitude [m];
                                     // 0 disables the sway entirely
  double dlc_weave_len_m = 40.0;     // sway length before scaling [m]
};

ScenarioParams scenario_params_from(const Config& cfg);

// One control-period decision from the path follower.
struct DriverCommand {
  double delta = 0.0;    // road-wheel steer angle [rad]
  double t_dem = 0.0;    // accelerator demand in [0, 1]
  bool coast = false;    // true: released accelerator (lane-change maneuver)
  bool done = false;     // true: scenario end condition reached
};

// Pure-pursuit steering plus a PI throttle with slew limiting. In the
// lane-change scenario the throttle holds the test speed through the approach
// straight and then releases for the rest of the run.
class PathFollower {
 public:
  enum class Mode { kTrack, kLaneChange };

  PathFollower(RefPath path, Mode mode, const DriverParams& dp,
               double wheelbase, double coast_from_x, double end_x);

  DriverCommand step(const VehicleState& s, double dt);
  const RefPath& path() const { return path_; }

 private:
  RefPath path_;
  Mode mode_;
  DriverParams dp_;
  double wheelbase_ = 1.53;
  double coast_from_x_;
  double end_x_;
  Pid throttle_pid_;
  double throttle_ = 0.0;
  double delta_ = 0.0;
  bool primed_ = false;
};

// Assembled scenario: follower plus the vehicle's starting state.
struct ScenarioSetup {
  PathFollower follower;
  VehicleState init;
  double suggested_duration_s = 0.0;
};

ScenarioSetup make_track_scenario(double speed_kmh, const ScenarioParams& sp,
                                  const DriverParams& dp,
                                  const VehicleParams& vp);
ScenarioSetup make_lane_change_scenario(double speed_kmh,
                                        const ScenarioParams& sp,
                                        const DriverParams& dp,
                                        const VehicleParams& vp);

}  // namespace edtsc
