// End-to-end acceptance gate. Each numbered check prints one PASS/FAIL line
// with the measured value and its bound; the process exit code is the number
// of failed checks. Run via ctest or directly from the build directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "edtsc/control.hpp"
#include "edtsc/estimation.hpp"
#include "edtsc/fis.hpp"
#include "edtsc/math_util.hpp"
#include "edtsc/observers.hpp"
#include "edtsc/plant.hpp"
#include "edtsc/sim.hpp"
#include "oracles.hpp"

using namespace edtsc;

namespace {

int g_failures = 0;

std::string num(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void check(const std::string& id, bool ok, const std::string& detail) {
  if (!ok) ++g_failures;
  std::printf("%s  %-3s  %s\n", ok ? "PASS" : "FAIL", id.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

SimResult run(SimSettings::Scenario sc, double speed_kmh, bool fis_on,
              double dt = 0.005) {
  SimSettings st;
  st.scenario = sc;
  st.speed_kmh = speed_kmh;
  st.fis_on = fis_on;
  st.dt = dt;
  st.duration_s = 0.0;  // scenario-suggested
  return run_scenario(Config{}, st);
}

// --- 1 & 2: estimator fidelity on the full track run -----------------------

void criterion_slip_and_torque_estimates(const SimResult& track_on,
                                         double wall_s) {
  const double corr_l =
      track_on.metrics.corr_lambda ? *track_on.metrics.corr_lambda : -1.0;
  check("1a", corr_l >= 0.99,
        "slip-estimate correlation on the track run: " + num(corr_l) +
            " (bound >= 0.99)");
  check("1b", wall_s < 10.0,
        "track run wall time: " + num(wall_s) + " s (bound < 10 s)");

  const double corr_t = track_on.metrics.corr_reaction_torque
                            ? *track_on.metrics.corr_reaction_torque
                            : -1.0;
  check("2", corr_t >= 0.85,
        "reaction-torque correlation while driving: " + num(corr_t) +
            " (bound >= 0.85)");
}

// --- 3: corrective layer on the track -------------------------------------

void criterion_track_improvement(const SimResult& on, const SimResult& off) {
  const double rms_red = reduction_pct(on.metrics.rms_gamma_err_radps,
                                       off.metrics.rms_gamma_err_radps);
  check("3a", rms_red >= 50.0,
        "track rms yaw-rate-error reduction: " + num(rms_red) +
            "% (bound >= 50%)");
  const double peak_red = reduction_pct(on.metrics.peak_lambda_true,
                                        off.metrics.peak_lambda_true);
  check("3b", peak_red >= 20.0,
        "track peak true-slip reduction: " + num(peak_red) +
            "% (bound >= 20%)");
  const bool time_ok =
      on.completed && (!off.completed ||
                       on.metrics.duration_s <= off.metrics.duration_s);
  check("3c", time_ok,
        "corrected run completes no slower (on: " +
            std::string(on.completed ? "done " : "DNF ") +
            num(on.metrics.duration_s) + " s, off: " +
            std::string(off.completed ? "done " : "DNF ") +
            num(off.metrics.duration_s) + " s)");
}

// --- 4: lane-change stability at both test speeds --------------------------

void criterion_lane_change(double speed_kmh, const SimResult& on,
                           const SimResult& off, double peak_bound) {
  const std::string tag = num(speed_kmh);
  const double rms_red = reduction_pct(on.metrics.rms_gamma_err_radps,
                                       off.metrics.rms_gamma_err_radps);
  check("4a", rms_red >= 50.0,
        "lane change " + tag + " km/h rms yaw-rate-error reduction: " +
            num(rms_red) + "% (bound >= 50%)");
  check("4b", on.metrics.peak_lambda_true < peak_bound,
        "lane change " + tag + " km/h peak true slip: " +
            num(on.metrics.peak_lambda_true) + " (bound < " + num(peak_bound) +
            ")");
  check("4c", on.metrics.rms_lambda_true < 0.005,
        "lane change " + tag + " km/h rms true slip: " +
            num(on.metrics.rms_lambda_true) + " (bound < 0.005)");
  const double lane = on.metrics.lane_err_max_m ? *on.metrics.lane_err_max_m
                                                : 1e9;
  check("4d", lane <= 1.2,
        "lane change " + tag + " km/h max lane deviation: " + num(lane) +
            " m (bound <= 1.2 m)");
}

// --- 5: cornering-stiffness identification ---------------------------------

void criterion_stiffness_identification() {
  // The observer runs at the plant's stiffness so its slip angle is
  // consistent; the pair (C_f, C_r) is not identifiable from (gamma, a_y,
  // delta, v) alone when the observer adapts too (see the estimation unit
  // tests for the invariant curve the adaptive wiring settles on).
  const double cf = 12000.0, cr = 16000.0, v = 12.0, dt = 0.005;
  const VehicleParams vp{};
  oracle::LinearBicycleTruth truth(cf, cr, v, vp);
  EstimationParams ep;
  SlipAngleObserver obs(ep);
  CorneringStiffnessEstimator cse(ep, dt);
  const Vec2 u{0.06, 0.0};
  for (int k = 0; k < 400; ++k) {  // 2 s
    const Vec2 y = truth.measure(u);
    obs.step(y, u, cf, cr, v, dt, vp);
    cse.step(obs.beta_hat(), obs.beta_hat_dot(), y.x0, u.x0, v, vp);
    truth.step(u, dt);
  }
  const double ef = std::fabs(cse.C_f_hat() - cf) / cf;
  const double er = std::fabs(cse.C_r_hat() - cr) / cr;
  check("5", ef <= 0.05 && er <= 0.05,
        "stiffness identified in 2 s: front err " + num(100.0 * ef) +
            "%, rear err " + num(100.0 * er) + "% (bound <= 5%)");
}

// --- 6: recursive vs batch least squares -----------------------------------

void criterion_rls_equivalence() {
  std::mt19937 rng(2024u);
  std::uniform_real_distribution<double> xi_dist(0.5, 2.0);
  std::normal_distribution<double> noise(0.0, 50.0);
  const Vec2 theta_true{11000.0, 15000.0};
  const Vec2 theta0{10000.0, 10000.0};
  const double gamma0 = 1e12, r_meas = 1e4;

  Rls2 rls(theta0, gamma0, r_meas);
  std::vector<double> xi0, y0, xi1, y1;
  for (int k = 0; k < 200; ++k) {
    const Mat2 Xi = Mat2::diag(xi_dist(rng), xi_dist(rng));
    const Vec2 Y{Xi.a * theta_true.x0 + noise(rng),
                 Xi.d * theta_true.x1 + noise(rng)};
    rls.step(Xi, Y);
    xi0.push_back(Xi.a);
    y0.push_back(Y.x0);
    xi1.push_back(Xi.d);
    y1.push_back(Y.x1);
  }
  const Vec2 batch =
      oracle::batch_ls_diag(xi0, y0, xi1, y1, theta0, gamma0, r_meas);
  const double rel =
      std::max(std::fabs(rls.theta().x0 - batch.x0) / std::fabs(batch.x0),
               std::fabs(rls.theta().x1 - batch.x1) / std::fabs(batch.x1));
  check("6", rel <= 1e-6,
        "recursive vs batch least-squares relative gap over 200 samples: " +
            num(rel) + " (bound <= 1e-6)");
}

// --- 7: observer pole placement across the operating range -----------------

void criterion_pole_placement() {
  const VehicleParams vp{};
  EstimationParams ep;
  std::mt19937 rng(777u);
  std::uniform_real_distribution<double> c_dist(5000.0, 60000.0);
  std::uniform_real_distribution<double> v_dist(5.0, 30.0);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const double cf = c_dist(rng), cr = c_dist(rng), v = v_dist(rng);
    if (std::fabs(vp.l_f * cf - vp.l_r * cr) < 500.0) continue;  // near-neutral
    ++done;
    const BicycleModel m = bicycle_matrices(cf, cr, v, vp);
    const Mat2 K = observer_gain(cf, cr, v, vp, ep);
    const Eig2 e = eigenvalues(m.A - K * m.C);
    const double err = std::max(
        {std::fabs(e.re0 - (-20.0)), std::fabs(e.re1 - (-15.0)),
         std::fabs(e.im0), std::fabs(e.im1)});
    worst = std::max(worst, err);
  }
  check("7", worst <= 1e-6,
        "worst pole-placement error over 100 draws: " + num(worst) +
            " (bound <= 1e-6)");
}

// --- 8: exact centroid vs high-resolution numerical integration ------------

void criterion_centroid_against_brute_force() {
  FuzzySystem fs;
  std::vector<double> hl, hr;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double slip = static_cast<double>(i) / 99.0;
      const double err = -1.0 + 2.0 * static_cast<double>(j) / 99.0;
      oracle::brute_rule_heights(fs, slip, err, hl, hr);
      const double el =
          std::fabs(fs.aggregate_centroid(hl) - oracle::brute_centroid(fs, hl, 10000));
      const double er =
          std::fabs(fs.aggregate_centroid(hr) - oracle::brute_centroid(fs, hr, 10000));
      worst = std::max({worst, el, er});
    }
  }
  check("8", worst <= 1e-3,
        "worst centroid gap to 1e4-point integration on a 100x100 input "
        "grid: " + num(worst) + " (bound <= 1e-3)");
}

// --- 9: differential split conserves the commanded voltage sum -------------

void criterion_split_identity() {
  const VehicleParams vp{};
  std::mt19937 rng(5u);
  std::uniform_real_distribution<double> v_dist(0.0, 48.0);
  std::uniform_real_distribution<double> d_dist(-0.6, 0.6);
  double worst = 0.0;
  bool straight_exact = true;
  for (int k = 0; k < 10000; ++k) {
    const double V = v_dist(rng), d = d_dist(rng);
    const ControlCommand c = differential_split(V, d, vp);
    worst = std::max(worst, std::fabs(c.v_left + c.v_right - 2.0 * V) /
                                std::max(1.0, std::fabs(V)));
    const ControlCommand s = differential_split(V, 0.0, vp);
    straight_exact = straight_exact && s.v_left == V && s.v_right == V;
  }
  check("9", worst <= 1e-9 && straight_exact,
        "voltage-sum identity worst relative error: " + num(worst) +
            " (bound <= 1e-9, straight split exact: " +
            (straight_exact ? "yes)" : "NO)"));
}

// --- 10: disturbance-observer bandwidth ------------------------------------

void criterion_observer_bandwidth() {
  const ObserverParams op = observer_params_from(Config{});
  const double dt = 0.005;
  DisturbanceObserver dob(op.omega_c, dt, op.nominal);
  for (int k = 0; k < 10; ++k) (void)dob.step(0.0, 0.0);

  // Current step at locked rotor: DC estimate K_tn * I.
  const double dc = op.nominal.K_tn * 9.0;
  const double target = dc * (1.0 - std::exp(-1.0));
  int first_cross = -1;
  double at20 = 0.0;
  for (int n = 1; n <= 40; ++n) {
    const double est = dob.step(9.0, 0.0);
    if (first_cross < 0 && est >= target) first_cross = n;
    if (n == 20) at20 = est;
  }
  // 1/omega_c = 20 ms = 4 periods; allow one period of slack either way.
  check("10a", first_cross >= 3 && first_cross <= 5,
        "time-constant crossing after " + std::to_string(first_cross) +
            " periods (expected 4 +- 1)");
  const double rel = std::fabs(at20 - dc) / dc;
  check("10b", rel <= 0.01,
        "settling error after 5 time constants: " + num(100.0 * rel) +
            "% (bound <= 1%)");
}

// --- 11: numerical hygiene --------------------------------------------------

void criterion_logs_finite(const std::vector<const SimResult*>& runs) {
  bool all_finite = true;
  std::size_t samples = 0;
  for (const SimResult* r : runs) {
    for (const auto& [name, col] : SimLog::schema()) {
      for (double v : r->log.*col) {
        ++samples;
        if (!std::isfinite(v)) all_finite = false;
      }
    }
  }
  check("11a", all_finite,
        "all logged values finite across " + std::to_string(samples) +
            " samples");
}

void criterion_tire_ellipse() {
  const TireParams tp{};
  std::mt19937 rng(99u);
  std::uniform_real_distribution<double> lam(-2.0, 2.0);
  std::uniform_real_distribution<double> alp(-1.2, 1.2);
  std::uniform_real_distribution<double> load(0.0, 3000.0);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double Fz = load(rng);
    const double by = (k % 2 == 0) ? tp.B_y_front : tp.B_y_rear;
    const auto [Fx, Fy] = tire_force(lam(rng), alp(rng), Fz, tp, by);
    const double cap = tp.mu * Fz;
    worst = std::max(worst, std::hypot(Fx, Fy) - cap);
  }
  check("11b", worst <= 1e-9,
        "combined tire force never exceeds the friction circle (worst "
        "overshoot " + num(worst) + " N, bound <= 1e-9)");
}

void criterion_step_size_convergence(const SimResult& coarse) {
  const SimResult fine = run(SimSettings::Scenario::kLaneChange, 40.0, true,
                             0.0025);
  const std::size_t n =
      std::min(coarse.log.size(), (fine.log.size() + 1) / 2);
  std::vector<double> diff;
  diff.reserve(n);
  for (std::size_t k = 0; k < n && 2 * k < fine.log.size(); ++k) {
    diff.push_back(coarse.log.gamma_radps[k] - fine.log.gamma_radps[2 * k]);
  }
  const double base = rms(coarse.log.gamma_radps);
  const double rel = base > 0.0 ? rms(diff) / base : 1e9;
  check("11c", diff.size() > 1000 && rel < 0.01,
        "yaw rate difference when halving the step size: " +
            num(100.0 * rel) + "% rms over " + std::to_string(diff.size()) +
            " samples (bound < 1%)");
}

}  // namespace

int main() {
  std::printf("acceptance: deterministic vehicle + controller checks\n");

  const auto t0 = std::chrono::steady_clock::now();
  const SimResult track_on = run(SimSettings::Scenario::kTrack, 60.0, true);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const SimResult track_off = run(SimSettings::Scenario::kTrack, 60.0, false);

  const SimResult dlc40_on = run(SimSettings::Scenario::kLaneChange, 40.0, true);
  const SimResult dlc40_off =
      run(SimSettings::Scenario::kLaneChange, 40.0, false);
  const SimResult dlc100_on =
      run(SimSettings::Scenario::kLaneChange, 100.0, true);
  const SimResult dlc100_off =
      run(SimSettings::Scenario::kLaneChange, 100.0, false);

  criterion_slip_and_torque_estimates(track_on, wall_s);
  criterion_track_improvement(track_on, track_off);
  criterion_lane_change(40.0, dlc40_on, dlc40_off, 0.04);
  criterion_lane_change(100.0, dlc100_on, dlc100_off, 0.08);
  criterion_stiffness_identification();
  criterion_rls_equivalence();
  criterion_pole_placement();
  criterion_centroid_against_brute_force();
  criterion_split_identity();
  criterion_observer_bandwidth();
  criterion_logs_finite({&track_on, &track_off, &dlc40_on, &dlc40_off,
                         &dlc100_on, &dlc100_off});
  criterion_tire_ellipse();
  criterion_step_size_convergence(dlc40_on);

  std::printf("acceptance: %d check(s) failed\n", g_failures);
  return g_failures;
}
