#pragma once

#include <limits>

#include "edtsc/config.hpp"
#include "edtsc/math_util.hpp"
#include "edtsc/plant.hpp"

namespace edtsc {

struct EstimationParams {
  double theta0_f = 10000.0;     // initial cornering stiffness guess [N/rad]
  double theta0_r = 10000.0;
  double gamma0 = 1e6;           // initial covariance scale
  double r_meas = 1e4;           // measurement noise variance (100 N)^2
  double c_min = 1000.0;         // stiffness projection bounds [N/rad]
  double c_max = 1e5;
  double pole1 = -15.0;          // observer poles [rad/s]
  double pole2 = -20.0;
  double v_min = 3.0;            // speed floor for the 1/v terms [m/s]
  double neutral_guard = 200.0;  // floor on |lf*Cf - lr*Cr| in the gain [N m/rad]
  double omega_c = 50.0;         // regressor/measurement filter cutoff [rad/s]
};

// Linear single-track (bicycle) model in states x = (beta, gamma) with inputs
// u = (delta, N_z) and measurements y = (gamma, a_y). Stiffnesses are
// per-wheel; the factor 2 for the two wheels of an axle is in the matrices.
struct BicycleModel {
  Mat2 A, B, C, D;
};

BicycleModel bicycle_matrices(double C_f, double C_r, double v,
                              const VehicleParams& vp);

// Pole-placing output-injection gain for the bicycle model above. Exact
// placement requires C_f, C_r away from the neutral-steer manifold
// lf*Cf = lr*Cr; the denominator is floored (sign-preserving) at
// `neutral_guard` to stay bounded near it.
Mat2 observer_gain(double C_f, double C_r, double v, const VehicleParams& vp,
                   const EstimationParams& ep);

// Adaptive slip-angle observer: x_hat' = A x_hat + B u + K (y - C x_hat - D u),
// integrated one explicit step per call with the gain re-placed at the current
// stiffness estimate.
class SlipAngleObserver {
 public:
  SlipAngleObserver() = default;
  explicit SlipAngleObserver(const EstimationParams& ep) : ep_(ep) {}

  // y = (gamma_meas, ay_meas), u = (delta, N_z). Returns the updated estimate.
  Vec2 step(const Vec2& y, const Vec2& u, double C_f, double C_r, double v,
            double dt, const VehicleParams& vp);

  double beta_hat() const { return x_.x0; }
  double gamma_hat() const { return x_.x1; }
  // Most recent state derivative (used by the stiffness estimator).
  double beta_hat_dot() const { return xdot_.x0; }
  bool reset_flagged() const { return reset_flag_; }

 private:
  EstimationParams ep_;
  Vec2 x_{0.0, 0.0};
  Vec2 xdot_{0.0, 0.0};
  bool reset_flag_ = false;
};

// Recursive least squares for Y = Xi * theta with 2-vector measurements and
// diagonal regressor, R-weighted:
//   K = P Xi' (R + Xi P Xi')^-1,  theta += K (Y - Xi theta),  P = (I - K Xi) P.
class Rls2 {
 public:
  Rls2() = default;
  Rls2(const Vec2& theta0, double gamma0, double r_meas)
      : theta_(theta0), P_(Mat2::diag(gamma0, gamma0)), R_(Mat2::diag(r_meas, r_meas)) {}

  void step(const Mat2& Xi, const Vec2& Y) {
    const Mat2 S = Xi * P_ * Xi.transpose() + R_;
    const Mat2 K = P_ * Xi.transpose() * S.inverse();
    theta_ = theta_ + K * (Y - Xi * theta_);
    P_ = (Mat2::identity() - K * Xi) * P_;
    // keep the covariance symmetric against roundoff
    P_.b = P_.c = 0.5 * (P_.b + P_.c);
  }

  const Vec2& theta() const { return theta_; }
  const Mat2& covariance() const { return P_; }
  void project(double lo, double hi) {
    theta_.x0 = clamp(theta_.x0, lo, hi);
    theta_.x1 = clamp(theta_.x1, lo, hi);
  }

 private:
  Vec2 theta_{0.0, 0.0};
  Mat2 P_ = Mat2::identity();
  Mat2 R_ = Mat2::identity();
};

// Full cornering-stiffness estimator: builds axle-force pseudo-measurements
// from measured yaw rate and the observed slip angle,
//   Y_f = M (l_r/L) (v*(beta_hat_dot + gamma) + l_f*gamma_dot) cos(delta)
//   Y_r = M (l_f/L) (v*(beta_hat_dot + gamma) - l_r*gamma_dot)
// regressors Xi = diag(-2(beta_hat + lf*gamma/v - delta), -2(beta_hat - lr*gamma/v)),
// low-passes both sides at omega_c, and runs the RLS with projection.
class CorneringStiffnessEstimator {
 public:
  CorneringStiffnessEstimator() = default;
  CorneringStiffnessEstimator(const EstimationParams& ep, double dt)
      : ep_(ep),
        rls_({ep.theta0_f, ep.theta0_r}, ep.gamma0, ep.r_meas),
        f_xi00_(ep.omega_c, dt),
        f_xi11_(ep.omega_c, dt),
        f_y0_(ep.omega_c, dt),
        f_y1_(ep.omega_c, dt),
        d_gamma_(ep.omega_c, dt) {}

  // One update; beta_hat / beta_hat_dot come from the slip-angle observer.
  // n_drive is the yaw moment delivered by the left/right drive split (as
  // estimated from the reaction-torque observers). The force reconstruction
  // attributes all yaw acceleration to tire lateral forces, so the share
  // produced by the drive moment must be removed first — otherwise every
  // corrective intervention shows up as a phantom +-N/L on the axle forces
  // and biases the fit exactly while the corrective layer is acting.
  void step(double beta_hat, double beta_hat_dot, double gamma, double delta,
            double v, const VehicleParams& vp, double n_drive = 0.0) {
    const double vg = std::max(v, ep_.v_min);
    const double gamma_dot = d_gamma_.step(gamma) - n_drive / vp.I_z;
    const double ay_cg = vg * (beta_hat_dot + gamma);
    const double Yf = vp.M * (vp.l_r / vp.L()) * (ay_cg + vp.l_f * gamma_dot) * std::cos(delta);
    const double Yr = vp.M * (vp.l_f / vp.L()) * (ay_cg - vp.l_r * gamma_dot);
    Mat2 Xi = Mat2::diag(-2.0 * (beta_hat + vp.l_f * gamma / vg - delta),
                         -2.0 * (beta_hat - vp.l_r * gamma / vg));
    Xi.a = f_xi00_.step(Xi.a);
    Xi.d = f_xi11_.step(Xi.d);
    const Vec2 Y{f_y0_.step(Yf), f_y1_.step(Yr)};
    rls_.step(Xi, Y);
    rls_.project(ep_.c_min, ep_.c_max);
  }

  double C_f_hat() const { return rls_.theta().x0; }
  double C_r_hat() const { return rls_.theta().x1; }

 private:
  EstimationParams ep_;
  Rls2 rls_;
  LowPass1 f_xi00_, f_xi11_, f_y0_, f_y1_;
  FilteredDerivative d_gamma_;
};

struct YawReference {
  double K_stab = 0.0;     // stability factor [s^2/m]
  double gamma_des = 0.0;  // desired yaw rate [rad/s]
};

// Steady-state cornering reference: K = (M/2L)(lr/Cf - lf/Cr),
// gamma_des = v*delta/(L + K v^2), denominator guarded below eps = 0.1 m.
// a_y_cap, when finite, additionally bounds |gamma_des| by a_y_cap/v: a
// reference implying more lateral acceleration than the tires can hold is
// unreachable, and near the formula's denominator zero (the estimated
// critical speed, easily crossed while the stiffness estimates are still
// converging) the uncapped gain amplifies small steer angles explosively.
YawReference desired_yaw_rate(double v, double delta, double C_f, double C_r,
                              const VehicleParams& vp,
                              double a_y_cap = std::numeric_limits<double>::infinity());

EstimationParams estimation_params_from(const Config& cfg);

}  // namespace edtsc
