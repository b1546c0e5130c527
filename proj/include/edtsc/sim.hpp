#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edtsc/config.hpp"

namespace edtsc {

// Simulation run request.
struct SimSettings {
  enum class Scenario { kTrack, kLaneChange };
  Scenario scenario = Scenario::kTrack;
  double speed_kmh = 60.0;  // track: cruise cap; lane change: test speed
  bool fis_on = true;       // false: corrective layer fully disabled
  double dt = 0.005;        // control and integration period [s]
  double duration_s = 0.0;  // <= 0: use the scenario's suggested duration
};

// Column-oriented time series of one run. All vectors share the same length;
// `schema()` fixes the CSV column order.
struct SimLog {
  std::vector<double> t_s, x_m, y_m, psi_rad, v_ms, u_ms, gamma_radps;
  std::vector<double> delta_rad, t_dem, coast;
  std::vector<double> omega_m_l_radps, omega_m_r_radps, i_l_a, i_r_a;
  std::vector<double> v_cmd_l_v, v_cmd_r_v;
  std::vector<double> lambda_true_l, lambda_true_r, lambda_hat_l, lambda_hat_r;
  std::vector<double> t_r_true_l_nm, t_r_true_r_nm, t_r_hat_l_nm, t_r_hat_r_nm;
  std::vector<double> beta_hat_rad, gamma_des_radps, gamma_err_radps, n_z_nm;
  std::vector<double> n_drive_hat_nm;
  std::vector<double> cf_hat_nprad, cr_hat_nprad;
  std::vector<double> v_corr_l, v_corr_r, dv_l_v, dv_r_v;
  std::vector<double> fz_fl_n, fz_fr_n, fz_rl_n, fz_rr_n;
  std::vector<double> ay_mps2, y_ref_m;

  using Column = std::vector<double> SimLog::*;
  static const std::vector<std::pair<std::string, Column>>& schema();
  std::size_t size() const { return t_s.size(); }
};

// Scalar summary of one run, serialized to metrics.txt as key=value lines.
// Correlations with undefined variance are absent (key omitted).
struct Metrics {
  std::string scenario;
  double speed_kmh = 0.0;
  bool fis_on = true;
  double dt_s = 0.0;
  double duration_s = 0.0;
  long steps = 0;
  bool completed = false;
  double final_x_m = 0.0;
  double final_y_m = 0.0;
  double distance_m = 0.0;
  // Window the yaw/slip statistics cover: "full" for the whole log, "coast"
  // for the released-throttle section of a lane change. The lane change is
  // driven up to the entry gate and coasted through the maneuver, so the
  // whole-run numbers would be dominated by drive slip on the approach
  // rather than by the maneuver under test. Duration, distance and lane
  // error always cover the whole run.
  std::string window = "full";
  double rms_gamma_err_radps = 0.0;
  double peak_gamma_err_radps = 0.0;
  double rms_lambda_true = 0.0;
  double peak_lambda_true = 0.0;
  double rms_lambda_hat = 0.0;
  double peak_lambda_hat = 0.0;
  std::optional<double> corr_lambda;
  std::optional<double> corr_reaction_torque;
  std::optional<double> lane_err_max_m;  // lane-change runs only
};

struct SimResult {
  SimLog log;
  Metrics metrics;
  bool completed = false;
};

// Run a scenario end to end with all parameters drawn from `cfg`.
// Throws ConfigError for invalid setup and NumericError if the state goes
// non-finite (the offending step index is in the message).
SimResult run_scenario(const Config& cfg, const SimSettings& st);

// Summary statistics over a finished log. Slip statistics pool both driven
// wheels; the reaction-torque correlation is restricted to samples whose true
// reaction torque is positive (driving).
Metrics compute_metrics(const SimLog& log, const SimSettings& st,
                        bool completed);

// Percentage reduction of `a` relative to baseline `b`: 100*(b-a)/b.
double reduction_pct(double a, double b);

// Serialization. Numbers use shortest round-trip-ish "%.9g"; output carries
// no timestamps so reruns are byte-identical.
std::string states_csv(const SimLog& log);
std::string metrics_text(const Metrics& m);
void write_text_file(const std::string& path, const std::string& text);

// key=value reader for metrics.txt (used by the comparison command).
std::map<std::string, std::string> read_metrics_file(const std::string& path);

// Human-readable A/B comparison of two metrics maps. Requires matching
// scenario and dt; reports reductions of run A relative to baseline B.
std::string format_comparison(const std::map<std::string, std::string>& a,
                              const std::map<std::string, std::string>& b);

}  // namespace edtsc
