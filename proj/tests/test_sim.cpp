#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "edtsc/sim.hpp"

using namespace edtsc;

namespace {

SimSettings short_run(SimSettings::Scenario sc, bool fis_on) {
  SimSettings st;
  st.scenario = sc;
  st.speed_kmh = 40.0;
  st.fis_on = fis_on;
  st.dt = 0.005;
  st.duration_s = 1.5;
  return st;
}

}  // namespace

TEST_CASE("short runs stay finite and consistent in every mode") {
  for (auto sc : {SimSettings::Scenario::kTrack,
                  SimSettings::Scenario::kLaneChange}) {
    for (bool fis : {true, false}) {
      CAPTURE(static_cast<int>(sc));
      CAPTURE(fis);
      const SimResult r = run_scenario(Config{}, short_run(sc, fis));
      const std::size_t n = r.log.size();
      REQUIRE(n == 301);  // 1.5 s at 5 ms, fencepost sample included
      for (const auto& [name, col] : SimLog::schema()) {
        CAPTURE(name);
        REQUIRE((r.log.*col).size() == n);
        for (double v : r.log.*col) REQUIRE(std::isfinite(v));
      }
      // Wheel loads stay non-negative by construction.
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(r.log.fz_fl_n[k] >= 0.0);
        CHECK(r.log.fz_fr_n[k] >= 0.0);
        CHECK(r.log.fz_rl_n[k] >= 0.0);
        CHECK(r.log.fz_rr_n[k] >= 0.0);
      }
      // Time stamps advance by dt from zero.
      CHECK(r.log.t_s.front() == 0.0);
      CHECK(r.log.t_s[1] == doctest::Approx(0.005));
      CHECK(r.metrics.steps == 301);
      CHECK(r.metrics.speed_kmh == 40.0);
    }
  }
}

TEST_CASE("disabling the corrective layer zeroes its outputs") {
  const SimResult off =
      run_scenario(Config{}, short_run(SimSettings::Scenario::kTrack, false));
  for (std::size_t k = 0; k < off.log.size(); ++k) {
    CHECK(off.log.v_corr_l[k] == 0.0);
    CHECK(off.log.v_corr_r[k] == 0.0);
    CHECK(off.log.dv_l_v[k] == 0.0);
    CHECK(off.log.dv_r_v[k] == 0.0);
  }
}

TEST_CASE("reruns are byte-identical") {
  const SimSettings st = short_run(SimSettings::Scenario::kLaneChange, true);
  const SimResult a = run_scenario(Config{}, st);
  const SimResult b = run_scenario(Config{}, st);
  CHECK(states_csv(a.log) == states_csv(b.log));
  CHECK(metrics_text(a.metrics) == metrics_text(b.metrics));
}

TEST_CASE("invalid run settings are rejected") {
  SimSettings st;
  st.dt = 0.0;
  CHECK_THROWS_AS((void)run_scenario(Config{}, st), ConfigError);
  st.dt = 0.06;
  CHECK_THROWS_AS((void)run_scenario(Config{}, st), ConfigError);
  st.dt = 0.005;
  st.speed_kmh = 0.0;
  CHECK_THROWS_AS((void)run_scenario(Config{}, st), ConfigError);
}

TEST_CASE("metrics summarize a crafted log") {
  SimLog log;
  const double dt = 0.01;
  // Four samples with easy statistics.
  for (int k = 0; k < 4; ++k) {
    log.t_s.push_back(k * dt);
    log.x_m.push_back(1.0 * k);  // 3 m of straight travel
    log.y_m.push_back(0.0);
    log.gamma_err_radps.push_back(k < 2 ? 0.3 : -0.3);
    log.lambda_true_l.push_back(0.02);
    log.lambda_true_r.push_back(0.04);
    log.lambda_hat_l.push_back(0.01 + 0.01 * k);
    log.lambda_hat_r.push_back(0.05);
    log.t_r_true_l_nm.push_back(k == 0 ? -1.0 : 2.0 + k);
    log.t_r_hat_l_nm.push_back(k == 0 ? 99.0 : 2.0 + k);  // exact where true>0
    log.t_r_true_r_nm.push_back(-5.0);                    // never driving
    log.t_r_hat_r_nm.push_back(7.0);
    log.y_ref_m.push_back(0.5);
  }
  // Pad untouched columns so every vector has the same length.
  for (const auto& [name, col] : SimLog::schema()) {
    if ((log.*col).empty()) (log.*col).assign(4, 0.0);
  }

  SimSettings st;
  st.scenario = SimSettings::Scenario::kLaneChange;
  st.speed_kmh = 40.0;
  st.fis_on = true;
  st.dt = dt;

  const Metrics m = compute_metrics(log, st, true);
  CHECK(m.scenario == "dlc");
  CHECK(m.completed);
  CHECK(m.steps == 4);
  CHECK(m.duration_s == doctest::Approx(0.03));
  CHECK(m.final_x_m == 3.0);
  CHECK(m.distance_m == doctest::Approx(3.0));
  CHECK(m.rms_gamma_err_radps == doctest::Approx(0.3));
  CHECK(m.peak_gamma_err_radps == doctest::Approx(0.3));

  // Pooled over both wheels: half the samples at 0.02, half at 0.04.
  CHECK(m.rms_lambda_true ==
        doctest::Approx(std::sqrt((0.02 * 0.02 + 0.04 * 0.04) / 2.0)));
  CHECK(m.peak_lambda_true == doctest::Approx(0.04));
  CHECK(m.peak_lambda_hat == doctest::Approx(0.05));
  // Left-wheel estimates rise while truth is flat; right wheel is constant.
  // Pooled correlation is still defined through the left wheel's variance.
  REQUIRE(m.corr_lambda.has_value());
  // Reaction-torque correlation uses only the three driving samples, where
  // the estimate matches the truth exactly.
  REQUIRE(m.corr_reaction_torque.has_value());
  CHECK(*m.corr_reaction_torque == doctest::Approx(1.0));
  REQUIRE(m.lane_err_max_m.has_value());
  CHECK(*m.lane_err_max_m == doctest::Approx(0.5));
}

TEST_CASE("track metrics omit the lane error") {
  SimLog log;
  for (const auto& [name, col] : SimLog::schema()) (log.*col).assign(3, 0.1);
  SimSettings st;  // defaults to track
  const Metrics m = compute_metrics(log, st, false);
  CHECK(m.scenario == "track");
  CHECK_FALSE(m.completed);
  CHECK_FALSE(m.lane_err_max_m.has_value());
  // Constant series' correlation is undefined and therefore absent.
  CHECK_FALSE(m.corr_lambda.has_value());
}

TEST_CASE("reduction percentage") {
  CHECK(reduction_pct(0.3, 2.0) == doctest::Approx(85.0));
  CHECK(reduction_pct(2.0, 2.0) == doctest::Approx(0.0));
  CHECK(reduction_pct(1.0, 0.0) == 0.0);
}

TEST_CASE("metrics file round trip and comparison") {
  const SimResult r =
      run_scenario(Config{}, short_run(SimSettings::Scenario::kTrack, true));
  const std::string path =
      (std::filesystem::temp_directory_path() / "edtsc_metrics_test.txt")
          .string();
  write_text_file(path, metrics_text(r.metrics));
  const auto m = read_metrics_file(path);
  CHECK(m.at("scenario") == "track");
  CHECK(m.at("fis") == "on");
  CHECK(m.at("steps") == "301");
  CHECK(std::stod(m.at("rms_gamma_err_radps")) ==
        doctest::Approx(r.metrics.rms_gamma_err_radps).epsilon(1e-8));
  std::remove(path.c_str());

  // Comparison of a run against itself reports zero reductions.
  auto b = m;
  const std::string report = format_comparison(m, b);
  CHECK(report.find("rms_gamma_err_radps") != std::string::npos);
  CHECK(report.find("reduction") != std::string::npos);

  // Mismatched scenarios cannot be compared.
  b["scenario"] = "dlc";
  CHECK_THROWS_AS((void)format_comparison(m, b), ConfigError);
}

TEST_CASE("csv serialization carries the schema header") {
  SimLog log;
  for (const auto& [name, col] : SimLog::schema()) (log.*col).assign(2, 1.25);
  const std::string csv = states_csv(log);
  CHECK(csv.rfind("t_s,", 0) == 0);  // header starts with the time column
  CHECK(csv.find("lambda_hat_l") != std::string::npos);
  CHECK(csv.find("y_ref_m") != std::string::npos);
  // Two data rows after the header.
  std::size_t rows = 0;
  for (char c : csv) rows += (c == '\n');
  CHECK(rows == 3);
  CHECK(csv.find("1.25") != std::string::npos);
}

TEST_CASE("write_text_file reports unwritable paths") {
  CHECK_THROWS_AS(
      write_text_file("/nonexistent_dir_zz/out.txt", "x"), std::runtime_error);
}
