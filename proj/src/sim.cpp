#include "edtsc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edtsc/control.hpp"
#include "edtsc/estimation.hpp"
#include "edtsc/fis.hpp"
#include "edtsc/math_util.hpp"
#include "edtsc/motor.hpp"
#include "edtsc/observers.hpp"
#include "edtsc/plant.hpp"
#include "edtsc/scenarios.hpp"

namespace edtsc {
namespace {

// Integrated state: pose, body velocities, and per-motor shaft speed/current.
// Wheel speeds are derived (omega_wheel = omega_m / G).
struct SimState {
  double x, y, psi, v, u, gamma;
  double om_l, om_r;  // motor shaft speeds [rad/s]
  double i_l, i_r;    // winding currents [A]
};

SimState axpy(const SimState& a, double h, const SimState& b) {
  return {a.x + h * b.x,     a.y + h * b.y,     a.psi + h * b.psi,
          a.v + h * b.v,     a.u + h * b.u,     a.gamma + h * b.gamma,
          a.om_l + h * b.om_l, a.om_r + h * b.om_r,
          a.i_l + h * b.i_l, a.i_r + h * b.i_r};
}

bool finite(const SimState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) &&
         std::isfinite(s.v) && std::isfinite(s.u) && std::isfinite(s.gamma) &&
         std::isfinite(s.om_l) && std::isfinite(s.om_r) &&
         std::isfinite(s.i_l) && std::isfinite(s.i_r);
}

VehicleState vehicle_view(const SimState& s, double G) {
  VehicleState veh;
  veh.x = s.x;
  veh.y = s.y;
  veh.psi = s.psi;
  veh.v = s.v;
  veh.u = s.u;
  veh.gamma = s.gamma;
  veh.omega_rl = s.om_l / G;
  veh.omega_rr = s.om_r / G;
  return veh;
}

// Full-state derivative under zero-order-held commands. Load-transfer
// accelerations ax/ay are frozen across the stage evaluations of one step.
SimState deriv(const SimState& s, double v_l, double v_r, double delta,
               double ax, double ay, const VehicleParams& vp,
               const TireParams& tp, const MotorParams& mp) {
  const VehicleState veh = vehicle_view(s, vp.G);
  const ForceBreakdown fb = evaluate_forces(veh, delta, ax, ay, vp, tp);

  SimState d{};
  d.x = s.v * std::cos(s.psi) - s.u * std::sin(s.psi);
  d.y = s.v * std::sin(s.psi) + s.u * std::cos(s.psi);
  d.psi = s.gamma;
  d.v = fb.sum_Fx_body / vp.M + s.gamma * s.u;
  d.u = fb.sum_Fy_body / vp.M - s.gamma * s.v;
  d.gamma = fb.yaw_moment / vp.I_z;

  const double ratio = vp.r / vp.G;
  const MotorDeriv ml = motor_derivatives(
      {s.om_l, s.i_l}, v_l, mp.F_c * sgn(s.om_l) + ratio * fb.rl.Fx, mp);
  const MotorDeriv mr = motor_derivatives(
      {s.om_r, s.i_r}, v_r, mp.F_c * sgn(s.om_r) + ratio * fb.rr.Fx, mp);
  d.om_l = ml.domega_m;
  d.i_l = ml.dcurrent;
  d.om_r = mr.domega_m;
  d.i_r = mr.dcurrent;
  return d;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const std::vector<std::pair<std::string, SimLog::Column>>& SimLog::schema() {
  static const std::vector<std::pair<std::string, Column>> cols = {
      {"t_s", &SimLog::t_s},
      {"x_m", &SimLog::x_m},
      {"y_m", &SimLog::y_m},
      {"psi_rad", &SimLog::psi_rad},
      {"v_ms", &SimLog::v_ms},
      {"u_ms", &SimLog::u_ms},
      {"gamma_radps", &SimLog::gamma_radps},
      {"delta_rad", &SimLog::delta_rad},
      {"t_dem", &SimLog::t_dem},
      {"coast", &SimLog::coast},
      {"omega_m_l_radps", &SimLog::omega_m_l_radps},
      {"omega_m_r_radps", &SimLog::omega_m_r_radps},
      {"i_l_a", &SimLog::i_l_a},
      {"i_r_a", &SimLog::i_r_a},
      {"v_cmd_l_v", &SimLog::v_cmd_l_v},
      {"v_cmd_r_v", &SimLog::v_cmd_r_v},
      {"lambda_true_l", &SimLog::lambda_true_l},
      {"lambda_true_r", &SimLog::lambda_true_r},
      {"lambda_hat_l", &SimLog::lambda_hat_l},
      {"lambda_hat_r", &SimLog::lambda_hat_r},
      {"t_r_true_l_nm", &SimLog::t_r_true_l_nm},
      {"t_r_true_r_nm", &SimLog::t_r_true_r_nm},
      {"t_r_hat_l_nm", &SimLog::t_r_hat_l_nm},
      {"t_r_hat_r_nm", &SimLog::t_r_hat_r_nm},
      {"beta_hat_rad", &SimLog::beta_hat_rad},
      {"gamma_des_radps", &SimLog::gamma_des_radps},
      {"gamma_err_radps", &SimLog::gamma_err_radps},
      {"n_z_nm", &SimLog::n_z_nm},
      {"n_drive_hat_nm", &SimLog::n_drive_hat_nm},
      {"cf_hat_nprad", &SimLog::cf_hat_nprad},
      {"cr_hat_nprad", &SimLog::cr_hat_nprad},
      {"v_corr_l", &SimLog::v_corr_l},
      {"v_corr_r", &SimLog::v_corr_r},
      {"dv_l_v", &SimLog::dv_l_v},
      {"dv_r_v", &SimLog::dv_r_v},
      {"fz_fl_n", &SimLog::fz_fl_n},
      {"fz_fr_n", &SimLog::fz_fr_n},
      {"fz_rl_n", &SimLog::fz_rl_n},
      {"fz_rr_n", &SimLog::fz_rr_n},
      {"ay_mps2", &SimLog::ay_mps2},
      {"y_ref_m", &SimLog::y_ref_m},
  };
  return cols;
}

SimResult run_scenario(const Config& cfg, const SimSettings& st) {
  if (st.dt <= 0.0 || st.dt > 0.05) {
    throw ConfigError("dt must lie in (0, 0.05] seconds");
  }

  const VehicleParams vp = vehicle_params_from(cfg);
  const TireParams tp = tire_params_from(cfg);
  MotorParams mp = motor_params_from(cfg);
  mp.cache_J(vp.J_w, vp.G);
  const ObserverParams op = observer_params_from(cfg);
  const EstimationParams ep = estimation_params_from(cfg);
  const ControlParams cp = control_params_from(cfg);
  const FisParams fp = fis_params_from(cfg);
  const FuzzySystem fis = fuzzy_system_from(cfg);
  const DriverParams dp = driver_params_from(cfg);
  const ScenarioParams sp = scenario_params_from(cfg);

  const bool lane_change = st.scenario == SimSettings::Scenario::kLaneChange;
  ScenarioSetup setup =
      lane_change ? make_lane_change_scenario(st.speed_kmh, sp, dp, vp)
                  : make_track_scenario(st.speed_kmh, sp, dp, vp);
  PathFollower follower = std::move(setup.follower);
  const double duration =
      st.duration_s > 0.0 ? st.duration_s : setup.suggested_duration_s;
  const double dt = st.dt;
  const long max_steps = std::lround(duration / dt);

  SimState s{};
  s.x = setup.init.x;
  s.y = setup.init.y;
  s.psi = setup.init.psi;
  s.v = setup.init.v;
  s.u = setup.init.u;
  s.gamma = setup.init.gamma;
  s.om_l = setup.init.omega_rl * vp.G;
  s.om_r = setup.init.omega_rr * vp.G;
  s.i_l = 0.0;
  s.i_r = 0.0;

  DisturbanceObserver dob_l(op.omega_c, dt, op.nominal);
  DisturbanceObserver dob_r(op.omega_c, dt, op.nominal);
  FilteredDerivative domega_l(op.omega_c, dt);
  FilteredDerivative domega_r(op.omega_c, dt);
  SlipEstimator sest_l(op.slip);
  SlipEstimator sest_r(op.slip);
  SlipAngleObserver obs(ep);
  CorneringStiffnessEstimator cse(ep, dt);
  YawMomentPi yaw_pi(cp);
  SlipLimiterPid slip_pid_l(cp);
  SlipLimiterPid slip_pid_r(cp);

  SimLog log;
  double ax_prev = 0.0;
  double ay_prev = 0.0;
  bool completed = false;

  for (long k = 0; k <= max_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const VehicleState veh = vehicle_view(s, vp.G);

    // Driver decision for this control period.
    const DriverCommand drv = follower.step(veh, dt);

    // Ground truth at the step start (also provides the ay measurement and
    // this step's frozen load-transfer accelerations).
    const ForceBreakdown fb = evaluate_forces(veh, drv.delta, ax_prev, ay_prev,
                                              vp, tp);
    const double ratio = vp.r / vp.G;
    const double t_r_true_l = ratio * fb.rl.Fx;
    const double t_r_true_r = ratio * fb.rr.Fx;

    // Motor-side observers.
    const double tr_l = reaction_torque(dob_l.step(s.i_l, s.om_l), mp.F_c);
    const double tr_r = reaction_torque(dob_r.step(s.i_r, s.om_r), mp.F_c);
    const double dom_l = domega_l.step(s.om_l);
    const double dom_r = domega_r.step(s.om_r);
    const double f_drive = vp.G * (tr_l + tr_r) / vp.r;
    const double lhat_l = sest_l.step(s.om_l, dom_l, f_drive, dt, vp);
    const double lhat_r = sest_r.step(s.om_r, dom_r, f_drive, dt, vp);
    // Differential-drive yaw moment actually delivered by the wheels, as seen
    // through the per-wheel reaction-torque observers.
    const double n_drive_hat =
        0.5 * vp.w * vp.G * (tr_l - tr_r) / vp.r;

    // Chassis-side estimation chain. The observer's corrective-moment input
    // is the delivered-moment estimate above, not the yaw PI's request: the
    // request is shaped by the fuzzy stage before any voltage moves, so
    // feeding it would inject yaw acceleration the vehicle never received.
    obs.step({s.gamma, fb.ay_body}, {drv.delta, n_drive_hat}, cse.C_f_hat(),
             cse.C_r_hat(), s.v, dt, vp);
    cse.step(obs.beta_hat(), obs.beta_hat_dot(), s.gamma, drv.delta, s.v, vp,
             n_drive_hat);
    const YawReference yr =
        desired_yaw_rate(s.v, drv.delta, cse.C_f_hat(), cse.C_r_hat(), vp,
                         tp.mu * vp.g);
    const double gamma_err = s.gamma - yr.gamma_des;
    // With the corrective layer disabled nothing acts on the yaw-moment
    // request, so neither the observer's input model nor the log should see
    // one: the run is then a plain driver-plus-differential baseline.
    const double n_z = st.fis_on ? yaw_pi.step(-gamma_err, dt) : 0.0;

    // Corrective layer.
    FISOutput fout{};
    double dv_l = 0.0;
    double dv_r = 0.0;
    if (st.fis_on) {
      fout = fis.infer(std::max(lhat_l, lhat_r) / fp.norm_slip,
                       gamma_err / fp.norm_yaw_err);
      dv_l = slip_pid_l.step(lhat_l, cp.lambda_ref, dt);
      dv_r = slip_pid_r.step(lhat_r, cp.lambda_ref, dt);
    }
    const ControlCommand cmd =
        drv.coast ? compose_commands_coast(fout, dv_l, dv_r, s.om_l, s.om_r,
                                           mp.K_b, cp)
                  : compose_commands(drv.t_dem, drv.delta, fout, dv_l, dv_r,
                                     s.om_l, s.om_r, mp.K_b, cp, vp);

    log.t_s.push_back(t);
    log.x_m.push_back(s.x);
    log.y_m.push_back(s.y);
    log.psi_rad.push_back(s.psi);
    log.v_ms.push_back(s.v);
    log.u_ms.push_back(s.u);
    log.gamma_radps.push_back(s.gamma);
    log.delta_rad.push_back(drv.delta);
    log.t_dem.push_back(drv.t_dem);
    log.coast.push_back(drv.coast ? 1.0 : 0.0);
    log.omega_m_l_radps.push_back(s.om_l);
    log.omega_m_r_radps.push_back(s.om_r);
    log.i_l_a.push_back(s.i_l);
    log.i_r_a.push_back(s.i_r);
    log.v_cmd_l_v.push_back(cmd.v_left);
    log.v_cmd_r_v.push_back(cmd.v_right);
    log.lambda_true_l.push_back(fb.lambda_true_rl);
    log.lambda_true_r.push_back(fb.lambda_true_rr);
    log.lambda_hat_l.push_back(lhat_l);
    log.lambda_hat_r.push_back(lhat_r);
    log.t_r_true_l_nm.push_back(t_r_true_l);
    log.t_r_true_r_nm.push_back(t_r_true_r);
    log.t_r_hat_l_nm.push_back(tr_l);
    log.t_r_hat_r_nm.push_back(tr_r);
    log.beta_hat_rad.push_back(obs.beta_hat());
    log.gamma_des_radps.push_back(yr.gamma_des);
    log.gamma_err_radps.push_back(gamma_err);
    log.n_z_nm.push_back(n_z);
    log.n_drive_hat_nm.push_back(n_drive_hat);
    log.cf_hat_nprad.push_back(cse.C_f_hat());
    log.cr_hat_nprad.push_back(cse.C_r_hat());
    log.v_corr_l.push_back(fout.v_corr_l);
    log.v_corr_r.push_back(fout.v_corr_r);
    log.dv_l_v.push_back(dv_l);
    log.dv_r_v.push_back(dv_r);
    log.fz_fl_n.push_back(fb.loads.fl);
    log.fz_fr_n.push_back(fb.loads.fr);
    log.fz_rl_n.push_back(fb.loads.rl);
    log.fz_rr_n.push_back(fb.loads.rr);
    log.ay_mps2.push_back(fb.ay_body);
    log.y_ref_m.push_back(
        lane_change ? follower.path().lateral_offset_at_x(s.x) : 0.0);

    if (drv.done) {
      completed = true;
      break;
    }

    // Advance one control period with zero-order-held commands.
    const SimState k1 =
        deriv(s, cmd.v_left, cmd.v_right, drv.delta, ax_prev, ay_prev, vp, tp, mp);
    const SimState k2 = deriv(axpy(s, 0.5 * dt, k1), cmd.v_left, cmd.v_right,
                              drv.delta, ax_prev, ay_prev, vp, tp, mp);
    const SimState k3 = deriv(axpy(s, 0.75 * dt, k2), cmd.v_left, cmd.v_right,
                              drv.delta, ax_prev, ay_prev, vp, tp, mp);
    SimState sum = axpy(s, dt * 2.0 / 9.0, k1);
    sum = axpy(sum, dt * 3.0 / 9.0, k2);
    sum = axpy(sum, dt * 4.0 / 9.0, k3);
    s = sum;
    s.i_l = clamp(s.i_l, -mp.I_max, mp.I_max);
    s.i_r = clamp(s.i_r, -mp.I_max, mp.I_max);
    if (!finite(s)) {
      throw NumericError("state went non-finite at step " + std::to_string(k) +
                         " (t = " + fmt(t) + " s)");
    }

    ax_prev = fb.ax_body;
    ay_prev = fb.ay_body;
  }

  SimResult res;
  res.log = std::move(log);
  res.completed = completed;
  res.metrics = compute_metrics(res.log, st, completed);
  return res;
}

Metrics compute_metrics(const SimLog& log, const SimSettings& st,
                        bool completed) {
  Metrics m;
  m.scenario =
      st.scenario == SimSettings::Scenario::kTrack ? "track" : "dlc";
  m.speed_kmh = st.speed_kmh;
  m.fis_on = st.fis_on;
  m.dt_s = st.dt;
  m.completed = completed;
  m.steps = static_cast<long>(log.size());
  if (log.size() == 0) return m;
  m.duration_s = log.t_s.back();
  m.final_x_m = log.x_m.back();
  m.final_y_m = log.y_m.back();
  double dist = 0.0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    dist += std::hypot(log.x_m[i] - log.x_m[i - 1], log.y_m[i] - log.y_m[i - 1]);
  }
  m.distance_m = dist;

  // For a lane change the maneuver under test is the coasting section; mask
  // the yaw/slip statistics to it so the driven approach (whose drag-balancing
  // slip is a property of the approach, not of the controller) does not
  // dominate them. Fall back to the full log if the run never coasted.
  const bool coast_window =
      m.scenario == "dlc" &&
      std::any_of(log.coast.begin(), log.coast.end(),
                  [](double c) { return c > 0.5; });
  m.window = coast_window ? "coast" : "full";
  const auto keep = [&](std::size_t i) {
    return !coast_window || log.coast[i] > 0.5;
  };
  std::vector<double> g_err, lam_true, lam_hat;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (!keep(i)) continue;
    g_err.push_back(log.gamma_err_radps[i]);
    lam_true.push_back(log.lambda_true_l[i]);
    lam_true.push_back(log.lambda_true_r[i]);
    lam_hat.push_back(log.lambda_hat_l[i]);
    lam_hat.push_back(log.lambda_hat_r[i]);
  }
  m.rms_gamma_err_radps = rms(g_err);
  m.peak_gamma_err_radps = peak_abs(g_err);
  m.rms_lambda_true = rms(lam_true);
  m.peak_lambda_true = peak_abs(lam_true);
  m.rms_lambda_hat = rms(lam_hat);
  m.peak_lambda_hat = peak_abs(lam_hat);
  m.corr_lambda = pearson(lam_hat, lam_true);

  std::vector<double> tr_hat, tr_true;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log.t_r_true_l_nm[i] > 0.0) {
      tr_hat.push_back(log.t_r_hat_l_nm[i]);
      tr_true.push_back(log.t_r_true_l_nm[i]);
    }
    if (log.t_r_true_r_nm[i] > 0.0) {
      tr_hat.push_back(log.t_r_hat_r_nm[i]);
      tr_true.push_back(log.t_r_true_r_nm[i]);
    }
  }
  if (!tr_true.empty()) {
    m.corr_reaction_torque = pearson(tr_hat, tr_true);
  }

  if (m.scenario == "dlc") {
    double worst = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      worst = std::max(worst, std::abs(log.y_m[i] - log.y_ref_m[i]));
    }
    m.lane_err_max_m = worst;
  }
  return m;
}

double reduction_pct(double a, double b) {
  if (b == 0.0) return 0.0;
  return 100.0 * (b - a) / b;
}

std::string states_csv(const SimLog& log) {
  std::ostringstream out;
  const auto& schema = SimLog::schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    out << (c ? "," : "") << schema[c].first;
  }
  out << "\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      out << (c ? "," : "") << fmt((log.*(schema[c].second))[i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string metrics_text(const Metrics& m) {
  std::ostringstream out;
  out << "scenario=" << m.scenario << "\n";
  out << "speed_kmh=" << fmt(m.speed_kmh) << "\n";
  out << "fis=" << (m.fis_on ? "on" : "off") << "\n";
  out << "dt_s=" << fmt(m.dt_s) << "\n";
  out << "duration_s=" << fmt(m.duration_s) << "\n";
  out << "steps=" << m.steps << "\n";
  out << "completed=" << (m.completed ? 1 : 0) << "\n";
  out << "final_x_m=" << fmt(m.final_x_m) << "\n";
  out << "final_y_m=" << fmt(m.final_y_m) << "\n";
  out << "distance_m=" << fmt(m.distance_m) << "\n";
  out << "window=" << m.window << "\n";
  out << "rms_gamma_err_radps=" << fmt(m.rms_gamma_err_radps) << "\n";
  out << "peak_gamma_err_radps=" << fmt(m.peak_gamma_err_radps) << "\n";
  out << "rms_lambda_true=" << fmt(m.rms_lambda_true) << "\n";
  out << "peak_lambda_true=" << fmt(m.peak_lambda_true) << "\n";
  out << "rms_lambda_hat=" << fmt(m.rms_lambda_hat) << "\n";
  out << "peak_lambda_hat=" << fmt(m.peak_lambda_hat) << "\n";
  if (m.corr_lambda) out << "corr_lambda=" << fmt(*m.corr_lambda) << "\n";
  if (m.corr_reaction_torque) {
    out << "corr_reaction_torque=" << fmt(*m.corr_reaction_torque) << "\n";
  }
  if (m.lane_err_max_m) {
    out << "lane_err_max_m=" << fmt(*m.lane_err_max_m) << "\n";
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::map<std::string, std::string> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string format_comparison(const std::map<std::string, std::string>& a,
                              const std::map<std::string, std::string>& b) {
  auto want = [](const std::map<std::string, std::string>& m,
                 const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) {
      throw ConfigError("metrics are missing key '" + key + "'");
    }
    return it->second;
  };
  if (want(a, "scenario") != want(b, "scenario")) {
    throw ConfigError("cannot compare runs of different scenarios");
  }
  if (want(a, "dt_s") != want(b, "dt_s")) {
    throw ConfigError("cannot compare runs with different dt");
  }

  std::ostringstream out;
  out << "scenario=" << want(a, "scenario") << " dt_s=" << want(a, "dt_s")
      << "\n";
  out << "completed_a=" << want(a, "completed")
      << " completed_b=" << want(b, "completed") << "\n";
  const char* reduced[] = {"rms_gamma_err_radps", "peak_gamma_err_radps",
                           "rms_lambda_true", "peak_lambda_true"};
  for (const char* key : reduced) {
    const auto ia = a.find(key);
    const auto ib = b.find(key);
    if (ia == a.end() || ib == b.end()) continue;
    const double va = std::stod(ia->second);
    const double vb = std::stod(ib->second);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s a=%.9g b=%.9g reduction_pct=%.9g\n",
                  key, va, vb, reduction_pct(va, vb));
    out << buf;
  }
  for (const char* key : {"duration_s", "distance_m", "lane_err_max_m"}) {
    const auto ia = a.find(key);
    const auto ib = b.find(key);
    if (ia == a.end() || ib == b.end()) continue;
    out << key << " a=" << ia->second << " b=" << ib->second << "\n";
  }
  return out.str();
}

}  // namespace edtsc
