#include "edtsc/estimation.hpp"

#include <cmath>

namespace edtsc {

BicycleModel bicycle_matrices(double C_f, double C_r, double v,
                              const VehicleParams& vp) {
  const double M = vp.M, I = vp.I_z, lf = vp.l_f, lr = vp.l_r;
  BicycleModel m;
  const double a11 = -2.0 * (C_f + C_r) / (M * v);
  const double a12 = -1.0 - 2.0 * (lf * C_f - lr * C_r) / (M * v * v);
  const double a21 = -2.0 * (lf * C_f - lr * C_r) / I;
  const double a22 = -2.0 * (lf * lf * C_f + lr * lr * C_r) / (I * v);
  const double b11 = 2.0 * C_f / (M * v);
  const double b21 = 2.0 * lf * C_f / I;
  m.A = {a11, a12, a21, a22};
  m.B = {b11, 0.0, b21, 1.0 / I};
  // y = (gamma, a_y): a_y = v(beta_dot + gamma) = v*a11*beta + v*(a12+1)*gamma + v*b11*delta
  m.C = {0.0, 1.0, v * a11, v * (a12 + 1.0)};
  m.D = {0.0, 0.0, v * b11, 0.0};
  return m;
}

Mat2 observer_gain(double C_f, double C_r, double v, const VehicleParams& vp,
                   const EstimationParams& ep) {
  const double M = vp.M, I = vp.I_z, lf = vp.l_f, lr = vp.l_r, L = vp.L();
  const double l1 = ep.pole1, l2 = ep.pole2;
  double den = lf * C_f - lr * C_r;  // singular at neutral steer; floored
  if (std::fabs(den) < ep.neutral_guard)
    den = (den >= 0.0 ? 1.0 : -1.0) * ep.neutral_guard;
  Mat2 K;
  K.a = l1 * l2 * den * I / (2.0 * C_f * C_r * L * L) - 1.0;  // K11
  K.b = 1.0 / v;                                              // K12
  K.c = -(l1 + l2);                                           // K21
  K.d = M * (lf * lf * C_f + lr * lr * C_r) / (I * den);      // K22
  return K;
}

Vec2 SlipAngleObserver::step(const Vec2& y, const Vec2& u, double C_f,
                             double C_r, double v, double dt,
                             const VehicleParams& vp) {
  const double vg = std::max(v, ep_.v_min);
  const BicycleModel m = bicycle_matrices(C_f, C_r, vg, vp);
  const Mat2 K = observer_gain(C_f, C_r, vg, vp, ep_);
  const Vec2 y_hat = m.C * x_ + m.D * u;
  xdot_ = m.A * x_ + m.B * u + K * (y - y_hat);
  Vec2 next = x_ + dt * xdot_;
  if (!std::isfinite(next.x0) || !std::isfinite(next.x1)) {
    next = {0.0, y.x0};  // re-anchor on the measured yaw rate
    xdot_ = {0.0, 0.0};
    reset_flag_ = true;
  }
  x_ = next;
  return x_;
}

YawReference desired_yaw_rate(double v, double delta, double C_f, double C_r,
                              const VehicleParams& vp, double a_y_cap) {
  YawReference out;
  const double L = vp.L();
  out.K_stab = vp.M / (2.0 * L) * (vp.l_r / C_f - vp.l_f / C_r);
  double den = L + out.K_stab * v * v;
  if (den < 0.1) den = 0.1;  // oversteer singularity guard
  out.gamma_des = v * delta / den;
  if (v > 0.0 && std::isfinite(a_y_cap)) {
    const double cap = a_y_cap / v;  // friction-limited yaw rate
    out.gamma_des = clamp(out.gamma_des, -cap, cap);
  }
  return out;
}

EstimationParams estimation_params_from(const Config& cfg) {
  EstimationParams e;
  e.theta0_f = cfg.get_double("rls.theta0_f", e.theta0_f);
  e.theta0_r = cfg.get_double("rls.theta0_r", e.theta0_r);
  e.gamma0 = cfg.get_double("rls.gamma0", e.gamma0);
  e.r_meas = cfg.get_double("rls.r_meas", e.r_meas);
  e.c_min = cfg.get_double("rls.c_min", e.c_min);
  e.c_max = cfg.get_double("rls.c_max", e.c_max);
  e.pole1 = cfg.get_double("stability.pole1", e.pole1);
  e.pole2 = cfg.get_double("stability.pole2", e.pole2);
  e.v_min = cfg.get_double("stability.v_min", e.v_min);
  e.neutral_guard = cfg.get_double("stability.neutral_guard", e.neutral_guard);
  e.omega_c = cfg.get_double("observer.omega_c", e.omega_c);
  if (e.pole1 >= 0 || e.pole2 >= 0)
    throw ConfigError("observer poles must be negative");
  if (e.c_min <= 0 || e.c_max <= e.c_min)
    throw ConfigError("stiffness projection bounds out of order");
  return e;
}

}  // namespace edtsc
