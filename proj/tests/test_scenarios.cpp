#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "edtsc/config.hpp"
#include "edtsc/scenarios.hpp"

using namespace edtsc;

namespace {
constexpr double kPi = 3.14159265358979323846;
VehicleParams veh() { return VehicleParams{}; }
}  // namespace

TEST_CASE("built-in track profile interpolates curvature ramps") {
  const RefPath path = RefPath::from_curvature(default_track_profile(), 0.5);
  const auto& pts = path.points();
  REQUIRE(pts.size() > 100);
  // Samples land on exact half-metre arc lengths; s = 26.5 sits halfway up
  // the first curvature ramp (0 at 25 m to 0.05 at 28 m).
  CHECK(pts[53].s == doctest::Approx(26.5).epsilon(1e-12));
  CHECK(pts[53].kappa == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(pts[80].s == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(pts[80].kappa == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(path.length() == doctest::Approx(312.1).epsilon(1e-12));
  // The first corner bends right: y grows once the ramp is passed.
  CHECK(pts[80].y > 0.0);
}

TEST_CASE("curvature integration reproduces straights and circles") {
  SUBCASE("straight line") {
    const RefPath path =
        RefPath::from_curvature({{0.0, 0.0}, {10.0, 0.0}}, 0.5);
    const auto& p = path.points().back();
    CHECK(p.s == doctest::Approx(10.0));
    CHECK(p.x == doctest::Approx(10.0));
    CHECK(p.y == 0.0);
    CHECK(p.psi == 0.0);
  }
  SUBCASE("full circle closes on itself") {
    const double total = 2.0 * kPi / 0.1;
    const RefPath path =
        RefPath::from_curvature({{0.0, 0.1}, {total, 0.1}}, 0.5);
    const auto& p = path.points().back();
    CHECK(std::hypot(p.x, p.y) < 0.05);
    CHECK(p.psi == doctest::Approx(2.0 * kPi).epsilon(1e-9));
  }
}

TEST_CASE("track profile csv parses with line-accurate errors") {
  const auto prof = parse_track_profile(
      "# test course\ns_m,kappa_1pm\n0, 0\n10, 0.05\n", "p.csv");
  REQUIRE(prof.size() == 2);
  CHECK(prof[1].s == 10.0);
  CHECK(prof[1].kappa == 0.05);

  CHECK_THROWS_WITH_AS(
      (void)parse_track_profile("# c\nwrong,header\n0,0\n", "p.csv"),
      doctest::Contains("p.csv:2"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_track_profile("s_m,kappa_1pm\n0,0\n5,0.1\n5,0.2\n", "p.csv"),
      doctest::Contains("strictly increasing"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_track_profile("s_m,kappa_1pm\n0,abc\n", "p.csv"),
      doctest::Contains("p.csv:2"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_track_profile("s_m,kappa_1pm\n5 0.1\n", "p.csv"),
      doctest::Contains("expected 's,kappa' row"), ConfigError);
  CHECK_THROWS_WITH_AS((void)parse_track_profile("s_m,kappa_1pm\n0,0\n", "p.csv"),
                       doctest::Contains("at least two rows"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_track_profile("s_m,kappa_1pm\n1,0\n5,0\n", "p.csv"),
      doctest::Contains("start at s = 0"), ConfigError);
  CHECK_THROWS_AS((void)load_track_profile("/nonexistent/track.csv"),
                  ConfigError);
}

TEST_CASE("speed planning caps corners and keeps entry speeds reachable") {
  RefPath path = RefPath::from_curvature(default_track_profile(), 0.5);
  path.plan_speeds(20.0, 8.0, 2.0);
  const auto& pts = path.points();
  const double v_corner = std::sqrt(8.0 / 0.05);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].v_plan <= 20.0 + 1e-12);
    CHECK(pts[i].v_plan > 0.0);
    if (i + 1 < pts.size()) {
      const double gap = pts[i + 1].s - pts[i].s;
      // No point demands more than a_coast of deceleration to the next.
      CHECK(pts[i].v_plan * pts[i].v_plan <=
            pts[i + 1].v_plan * pts[i + 1].v_plan + 2.0 * 2.0 * gap + 1e-9);
    }
  }
  // Inside the tightest corner the plan is the lateral-acceleration cap.
  CHECK(pts[80].v_plan == doctest::Approx(v_corner).epsilon(1e-12));
  // Corner entry must already be slowed below the straight-line cap.
  CHECK(pts[0].v_plan < 20.0);
}

TEST_CASE("lane-change path geometry") {
  const std::vector<double> sections{12.0, 13.5, 11.0, 12.5, 12.0};
  const RefPath path =
      RefPath::from_lane_change(15.0, sections, 1.0, -3.0, 12.0, 0.5);
  const auto& pts = path.points();
  // Total horizontal span: 15 approach + 61 maneuver + 12 tail.
  CHECK(pts.back().x == doctest::Approx(88.0).epsilon(1e-12));
  CHECK(pts.back().s >= 88.0);
  CHECK(pts.back().s < 89.0);

  // Approach and exit run on the lane centre; the hold section sits at the
  // full offset; the outbound blend passes half offset at its midpoint.
  CHECK(path.lateral_offset_at_x(10.0) == 0.0);
  CHECK(path.lateral_offset_at_x(45.0) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(path.lateral_offset_at_x(33.75) == doctest::Approx(-1.5).epsilon(2e-3));
  CHECK(path.lateral_offset_at_x(80.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(path.lateral_offset_at_x(500.0) == doctest::Approx(0.0).scale(1.0));

  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(std::fabs(pts[i].y) <= 3.0 + 1e-12);
    if (i > 0) {
      // Heading is continuous: cosine blends keep the turn rate bounded.
      CHECK(std::fabs(pts[i].psi - pts[i - 1].psi) < 0.06);
    }
  }

  CHECK_THROWS_AS((void)RefPath::from_lane_change(15.0, {12.0, 13.5, 11.0},
                                                  1.0, -3.0, 12.0, 0.5),
                  ConfigError);
  CHECK_THROWS_AS(
      (void)RefPath::from_lane_change(15.0, sections, 0.0, -3.0, 12.0, 0.5),
      ConfigError);
}

TEST_CASE("nearest-point walker only moves forward") {
  RefPath path = RefPath::from_curvature({{0.0, 0.0}, {60.0, 0.0}}, 0.5);
  const PathPoint& a = path.advance_nearest(20.0, 0.3);
  CHECK(a.s == doctest::Approx(20.0));
  CHECK(path.progress() == doctest::Approx(20.0));
  // A query behind the current progress cannot drag the walker backwards.
  const PathPoint& b = path.advance_nearest(5.0, 0.0);
  CHECK(b.s == doctest::Approx(20.0));
  const PathPoint& ahead = path.lookahead_from_nearest(5.0);
  CHECK(ahead.s == doctest::Approx(25.0));
  path.reset_progress();
  CHECK(path.progress() == 0.0);
}

TEST_CASE("path follower steers toward the path and slews its outputs") {
  RefPath path = RefPath::from_curvature({{0.0, 0.0}, {60.0, 0.0}}, 0.5);
  path.plan_speeds(10.0, 8.0, 2.0);
  DriverParams dp;
  PathFollower pf(path, PathFollower::Mode::kTrack, dp, 1.53, 0.0, 0.0);

  VehicleState s{};
  s.x = 5.0;
  s.y = 1.0;  // right of the lane centre
  s.v = 5.0;
  const double dt = 0.005;
  const DriverCommand c1 = pf.step(s, dt);
  CHECK(c1.delta < -0.1);   // steer left, back toward the path
  CHECK(c1.delta > -0.25);
  // Rolling start far below plan speed: full demand from the first sample
  // (the PI saturates and the first command is not slew-limited).
  CHECK(c1.t_dem == doctest::Approx(1.0));
  CHECK_FALSE(c1.coast);
  CHECK_FALSE(c1.done);

  const DriverCommand c2 = pf.step(s, dt);
  CHECK(c2.t_dem == doctest::Approx(1.0));
  // Steering stays within one slew step of the previous command.
  CHECK(std::fabs(c2.delta - c1.delta) <= dp.delta_slew * dt + 1e-12);

  // Once near plan speed the demand backs off, but only at the slew rate.
  VehicleState quick = s;
  quick.v = 9.9;
  const DriverCommand cq = pf.step(quick, dt);
  CHECK(cq.t_dem == doctest::Approx(1.0 - dp.throttle_slew * dt).epsilon(1e-9));

  // A sudden large offset is tracked at the slew rate, not instantly: the
  // command wants to steer much further left, so it moves one slew step down.
  VehicleState far = s;
  far.y = 4.0;
  const DriverCommand c3 = pf.step(far, dt);
  CHECK(c3.delta == doctest::Approx(cq.delta - dp.delta_slew * dt).epsilon(1e-9));

  // Mirrored offset steers the other way on a fresh follower.
  PathFollower pf2(path, PathFollower::Mode::kTrack, dp, 1.53, 0.0, 0.0);
  VehicleState left = s;
  left.y = -1.0;
  CHECK(pf2.step(left, dt).delta > 0.1);
}

TEST_CASE("path follower finishes the track near the path end") {
  RefPath path = RefPath::from_curvature({{0.0, 0.0}, {60.0, 0.0}}, 0.5);
  path.plan_speeds(10.0, 8.0, 2.0);
  PathFollower pf(path, PathFollower::Mode::kTrack, DriverParams{}, 1.53, 0.0,
                  0.0);
  VehicleState s{};
  s.x = 59.7;
  s.v = 8.0;
  CHECK(pf.step(s, 0.005).done);
}

TEST_CASE("lane-change follower releases the accelerator past the settle point") {
  const std::vector<double> sections{12.0, 13.5, 11.0, 12.5, 12.0};
  RefPath path = RefPath::from_lane_change(15.0, sections, 1.0, -3.0, 12.0, 0.5);
  path.plan_speeds(11.11, 1e9, 1e9);
  PathFollower pf(path, PathFollower::Mode::kLaneChange, DriverParams{}, 1.53,
                  15.0, 87.0);
  VehicleState s{};
  s.v = 11.11;
  s.x = 10.0;
  const DriverCommand before = pf.step(s, 0.005);
  CHECK_FALSE(before.coast);
  s.x = 16.0;
  const DriverCommand after = pf.step(s, 0.005);
  CHECK(after.coast);
  CHECK(after.t_dem == 0.0);
  CHECK_FALSE(after.done);
  s.x = 87.5;
  CHECK(pf.step(s, 0.005).done);
}

TEST_CASE("track scenario assembles a rolling start") {
  const ScenarioSetup setup =
      make_track_scenario(60.0, ScenarioParams{}, DriverParams{}, veh());
  CHECK(setup.init.v == 3.0);
  CHECK(setup.init.omega_rl == doctest::Approx(3.0 / 0.23));
  CHECK(setup.init.omega_rr == doctest::Approx(3.0 / 0.23));
  CHECK(setup.init.x == 0.0);
  CHECK(setup.init.y == 0.0);
  // length / (0.4 * v_cap) + 15
  CHECK(setup.suggested_duration_s ==
        doctest::Approx(312.1 / (0.4 * 60.0 / 3.6) + 15.0).epsilon(1e-9));
  CHECK_THROWS_AS(
      (void)make_track_scenario(-5.0, ScenarioParams{}, DriverParams{}, veh()),
      ConfigError);
}

TEST_CASE("lane-change scenario starts at speed and scales with it") {
  const ScenarioSetup at40 =
      make_lane_change_scenario(40.0, ScenarioParams{}, DriverParams{}, veh());
  const double v40 = 40.0 / 3.6;
  CHECK(at40.init.v == doctest::Approx(v40));
  CHECK(at40.init.omega_rl == doctest::Approx(v40 / 0.23));
  CHECK(at40.follower.path().points().back().x == doctest::Approx(88.0));
  CHECK(at40.suggested_duration_s ==
        doctest::Approx(3.0 * 87.0 / v40 + 8.0).epsilon(1e-9));

  // Higher test speed stretches the maneuver sections proportionally.
  const ScenarioSetup at100 =
      make_lane_change_scenario(100.0, ScenarioParams{}, DriverParams{}, veh());
  CHECK(at100.follower.path().points().back().x ==
        doctest::Approx(15.0 + 61.0 * 2.5 + 12.0));
  CHECK_THROWS_AS((void)make_lane_change_scenario(0.0, ScenarioParams{},
                                                  DriverParams{}, veh()),
                  ConfigError);
}

TEST_CASE("driver and scenario params parse with validation") {
  Config cfg;
  const DriverParams dp = driver_params_from(cfg);
  CHECK(dp.lookahead_base == 2.0);
  CHECK(dp.delta_max == 0.6);
  CHECK(dp.v_ff == doctest::Approx(0.0145));
  const ScenarioParams sp = scenario_params_from(cfg);
  CHECK(sp.track_ds == 0.5);
  CHECK(sp.dlc_offset_m == -2.9);
  REQUIRE(sp.dlc_sections_m.size() == 5);
  CHECK(sp.dlc_sections_m[1] == 13.5);

  cfg.set("driver.delta_max", "0.4");
  CHECK(driver_params_from(cfg).delta_max == 0.4);
  cfg.set("scenario.dlc_offset_m", "3.5");
  CHECK(scenario_params_from(cfg).dlc_offset_m == 3.5);

  Config bad;
  bad.set("driver.delta_max", "-1");
  CHECK_THROWS_AS((void)driver_params_from(bad), ConfigError);
  Config bad2;
  bad2.set("scenario.dlc_sections_m", "1 2 3");
  CHECK_THROWS_AS((void)scenario_params_from(bad2), ConfigError);
}
