#include "edtsc/plant.hpp"

#include <cmath>

#include "edtsc/math_util.hpp"

namespace edtsc {

std::pair<double, double> tire_force(double lambda, double alpha, double Fz,
                                     const TireParams& tp, double by_axle) {
  if (Fz < 0.0) throw NumericError("tire_force: negative normal load");
  if (Fz == 0.0) return {0.0, 0.0};
  const double cap = tp.mu * Fz;
  double Fx = cap * std::sin(tp.C_x * std::atan(tp.B_x * lambda));
  double Fy = cap * std::sin(tp.C_y * std::atan(by_axle * alpha));
  // Radial friction-ellipse clamp: scale the resultant back onto the circle.
  const double mag = std::hypot(Fx, Fy);
  if (mag > cap) {
    const double k = cap / mag;
    Fx *= k;
    Fy *= k;
  }
  return {Fx, Fy};
}

WheelLoads normal_loads(double ax, double ay, const VehicleParams& vp) {
  const double L = vp.L();
  const double Wf = vp.M * vp.g * vp.l_r / L;  // static front axle
  const double Wr = vp.M * vp.g * vp.l_f / L;  // static rear axle
  const double d_long = vp.M * ax * vp.h_cg / (2.0 * L);   // per wheel
  const double d_lat = vp.M * ay * vp.h_cg / (2.0 * vp.w); // per axle side
  // Accelerating (ax > 0) unloads the front; ay > 0 (rightward force,
  // right turn) loads the LEFT wheels.
  WheelLoads w;
  w.fl = std::max(0.0, Wf / 2.0 - d_long + d_lat);
  w.fr = std::max(0.0, Wf / 2.0 - d_long - d_lat);
  w.rl = std::max(0.0, Wr / 2.0 + d_long + d_lat);
  w.rr = std::max(0.0, Wr / 2.0 + d_long - d_lat);
  return w;
}

namespace {

// Slip angle in the "positive alpha -> turn-holding force" sense for a wheel
// whose contact point moves with body-frame velocity (vx, vy); steer is the
// wheel steering angle (0 for rear wheels).
double slip_angle(double vx, double vy, double steer, double v_reg) {
  const double denom = std::max(vx, v_reg);
  return steer - std::atan2(vy, denom);
}

}  // namespace

ForceBreakdown evaluate_forces(const VehicleState& s, double delta, double ax,
                               double ay, const VehicleParams& vp,
                               const TireParams& tp) {
  ForceBreakdown out;
  out.loads = normal_loads(ax, ay, vp);

  const double hw = vp.w / 2.0;
  // Contact-point body-frame velocities: vp_x = v - gamma*y_p, vp_y = u + gamma*x_p.
  const double vfl_x = s.v + s.gamma * hw, vfl_y = s.u + s.gamma * vp.l_f;
  const double vfr_x = s.v - s.gamma * hw, vfr_y = s.u + s.gamma * vp.l_f;
  const double vrl_x = s.v + s.gamma * hw, vrl_y = s.u - s.gamma * vp.l_r;
  const double vrr_x = s.v - s.gamma * hw, vrr_y = s.u - s.gamma * vp.l_r;

  out.alpha_fl = slip_angle(vfl_x, vfl_y, delta, tp.v_reg);
  out.alpha_fr = slip_angle(vfr_x, vfr_y, delta, tp.v_reg);
  out.alpha_rl = slip_angle(vrl_x, vrl_y, 0.0, tp.v_reg);
  out.alpha_rr = slip_angle(vrr_x, vrr_y, 0.0, tp.v_reg);

  // Rear slip ratios: (V_w - V_contact)/V_w with a regularized denominator for
  // the force model and a guarded exact value for logging.
  const double Vw_rl = vp.r * s.omega_rl;
  const double Vw_rr = vp.r * s.omega_rr;
  out.lambda_rl = (Vw_rl - vrl_x) / std::max(Vw_rl, tp.v_reg);
  out.lambda_rr = (Vw_rr - vrr_x) / std::max(Vw_rr, tp.v_reg);
  out.lambda_true_rl = Vw_rl > 0.5 ? (Vw_rl - vrl_x) / Vw_rl : 0.0;
  out.lambda_true_rr = Vw_rr > 0.5 ? (Vw_rr - vrr_x) / Vw_rr : 0.0;

  // Front wheels roll freely: no longitudinal slip input.
  auto [fxfl, fyfl] = tire_force(0.0, out.alpha_fl, out.loads.fl, tp, tp.B_y_front);
  auto [fxfr, fyfr] = tire_force(0.0, out.alpha_fr, out.loads.fr, tp, tp.B_y_front);
  auto [fxrl, fyrl] = tire_force(out.lambda_rl, out.alpha_rl, out.loads.rl, tp, tp.B_y_rear);
  auto [fxrr, fyrr] = tire_force(out.lambda_rr, out.alpha_rr, out.loads.rr, tp, tp.B_y_rear);
  out.fl = {fxfl, fyfl, out.loads.fl};
  out.fr = {fxfr, fyfr, out.loads.fr};
  out.rl = {fxrl, fyrl, out.loads.rl};
  out.rr = {fxrr, fyrr, out.loads.rr};

  out.F_drag = 0.5 * vp.rho * vp.CdA * s.v * std::fabs(s.v);

  const double cd = std::cos(delta), sd = std::sin(delta);
  // Front wheel-plane forces rotated into the body frame (Fx front = 0).
  const double Ff_x = -(fyfl + fyfr) * sd;
  const double Ff_y = (fyfl + fyfr) * cd;
  out.sum_Fx_body = Ff_x + fxrl + fxrr - out.F_drag;
  out.sum_Fy_body = Ff_y + fyrl + fyrr;
  // Yaw moments about the CoG (z down, positive = right turn).
  out.yaw_moment = vp.l_f * cd * (fyfl + fyfr) + hw * sd * (fyfr - fyfl) -
                   vp.l_r * (fyrl + fyrr) + hw * (fxrl - fxrr);
  out.ax_body = out.sum_Fx_body / vp.M;
  out.ay_body = out.sum_Fy_body / vp.M;
  return out;
}

VehicleState vehicle_derivatives(const VehicleState& s, double delta,
                                 double T_rl, double T_rr, double ax, double ay,
                                 const VehicleParams& vp, const TireParams& tp) {
  const ForceBreakdown f = evaluate_forces(s, delta, ax, ay, vp, tp);

  VehicleState d;
  d.x = s.v * std::cos(s.psi) - s.u * std::sin(s.psi);
  d.y = s.v * std::sin(s.psi) + s.u * std::cos(s.psi);
  d.psi = s.gamma;
  d.v = f.sum_Fx_body / vp.M + s.gamma * s.u;
  d.u = f.sum_Fy_body / vp.M - s.gamma * s.v;
  d.gamma = f.yaw_moment / vp.I_z;
  d.omega_rl = (T_rl - vp.r * f.rl.Fx) / vp.J_w;
  d.omega_rr = (T_rr - vp.r * f.rr.Fx) / vp.J_w;

  const bool finite = std::isfinite(d.x) && std::isfinite(d.y) &&
                      std::isfinite(d.psi) && std::isfinite(d.v) &&
                      std::isfinite(d.u) && std::isfinite(d.gamma) &&
                      std::isfinite(d.omega_rl) && std::isfinite(d.omega_rr);
  if (!finite) throw NumericError("vehicle_derivatives: non-finite derivative");
  return d;
}

VehicleParams vehicle_params_from(const Config& cfg) {
  VehicleParams p;
  p.M = cfg.get_double("vehicle.mass_kg", p.M);
  p.I_z = cfg.get_double("vehicle.yaw_inertia_kgm2", p.I_z);
  p.l_f = cfg.get_double("vehicle.lf_m", p.l_f);
  p.l_r = cfg.get_double("vehicle.lr_m", p.l_r);
  p.w = cfg.get_double("vehicle.track_width_m", p.w);
  p.J_w = cfg.get_double("vehicle.wheel_inertia_kgm2", p.J_w);
  p.r = cfg.get_double("vehicle.wheel_radius_m", p.r);
  p.G = cfg.get_double("vehicle.gear_ratio", p.G);
  p.h_cg = cfg.get_double("vehicle.cg_height_m", p.h_cg);
  p.CdA = cfg.get_double("vehicle.drag_area_m2", p.CdA);
  p.rho = cfg.get_double("vehicle.air_density_kgm3", p.rho);
  p.g = cfg.get_double("vehicle.gravity_ms2", p.g);
  if (p.M <= 0 || p.I_z <= 0 || p.l_f <= 0 || p.l_r <= 0 || p.w <= 0 ||
      p.r <= 0 || p.G < 1.0 || p.h_cg < 0)
    throw ConfigError("vehicle parameters out of range");
  return p;
}

TireParams tire_params_from(const Config& cfg) {
  TireParams t;
  t.mu = cfg.get_double("tires.mu", t.mu);
  t.B_x = cfg.get_double("tires.bx", t.B_x);
  t.C_x = cfg.get_double("tires.cx", t.C_x);
  t.B_y_front = cfg.get_double("tires.by_front", t.B_y_front);
  t.B_y_rear = cfg.get_double("tires.by_rear", t.B_y_rear);
  t.C_y = cfg.get_double("tires.cy", t.C_y);
  t.v_reg = cfg.get_double("tires.v_reg_ms", t.v_reg);
  if (t.mu <= 0 || t.B_x <= 0 || t.C_x <= 0 || t.B_y_front <= 0 ||
      t.B_y_rear <= 0 || t.C_y <= 0 || t.v_reg <= 0)
    throw ConfigError("tire parameters out of range");
  return t;
}

}  // namespace edtsc
