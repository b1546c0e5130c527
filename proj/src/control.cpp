#include "edtsc/control.hpp"

#include <algorithm>
#include <cmath>

#include "edtsc/config.hpp"

namespace edtsc {

ControlCommand differential_split(double v_cmd, double delta,
                                  const VehicleParams& vp) {
  // Turn-center geometry: the inner wheel traces a smaller radius than the
  // outer one, so its voltage (hence speed) command shrinks in proportion.
  // Straight ahead the radius is infinite and both sides get v_cmd exactly.
  const double t = std::tan(delta);
  if (t == 0.0) {
    return {v_cmd, v_cmd};
  }
  const double radius = vp.L() / t;  // signed: positive = right turn
  const double half_track = 0.5 * vp.w;
  // Positive steer (right turn): left wheel is the outer wheel.
  const double v_left = v_cmd * (radius + half_track) / radius;
  const double v_right = v_cmd * (radius - half_track) / radius;
  return {v_left, v_right};
}

ControlCommand compose_commands(double t_dem, double delta,
                                const FISOutput& fis, double dv_l, double dv_r,
                                double omega_m_l, double omega_m_r, double k_b,
                                const ControlParams& cp,
                                const VehicleParams& vp) {
  const double v_base = t_dem * cp.v_max;
  ControlCommand cmd = differential_split(v_base, delta, vp);
  cmd.v_left *= 1.0 + cp.k_fis * fis.v_corr_l;
  cmd.v_right *= 1.0 + cp.k_fis * fis.v_corr_r;
  cmd.v_left += dv_l;
  cmd.v_right += dv_r;
  // Floor near the back-EMF so a cut command coasts instead of hard-braking
  // through regeneration; a wheel at rest keeps the true zero floor.
  cmd.v_left = std::max(cmd.v_left, k_b * omega_m_l - cp.regen_margin_v);
  cmd.v_right = std::max(cmd.v_right, k_b * omega_m_r - cp.regen_margin_v);
  cmd.v_left = clamp(cmd.v_left, 0.0, cp.v_max);
  cmd.v_right = clamp(cmd.v_right, 0.0, cp.v_max);
  return cmd;
}

ControlCommand compose_commands_coast(const FISOutput& fis, double dv_l,
                                      double dv_r, double omega_m_l,
                                      double omega_m_r, double k_b,
                                      const ControlParams& cp) {
  // Coast composition: idle at the back-EMF (zero electromagnetic torque) and
  // let the corrections push symmetric volts around it. Used where the test
  // procedure calls for a released accelerator.
  ControlCommand cmd;
  cmd.v_left = k_b * omega_m_l + cp.fis_authority_v * fis.v_corr_l + dv_l;
  cmd.v_right = k_b * omega_m_r + cp.fis_authority_v * fis.v_corr_r + dv_r;
  cmd.v_left = clamp(cmd.v_left, 0.0, cp.v_max);
  cmd.v_right = clamp(cmd.v_right, 0.0, cp.v_max);
  return cmd;
}

ControlParams control_params_from(const Config& cfg) {
  ControlParams cp;
  cp.yaw_kp = cfg.get_double("control.yaw_kp", cp.yaw_kp);
  cp.yaw_ki = cfg.get_double("control.yaw_ki", cp.yaw_ki);
  cp.nz_max = cfg.get_double("control.nz_max", cp.nz_max);
  cp.slip_kp = cfg.get_double("control.slip_kp", cp.slip_kp);
  cp.slip_ki = cfg.get_double("control.slip_ki", cp.slip_ki);
  cp.slip_kd = cfg.get_double("control.slip_kd", cp.slip_kd);
  cp.lambda_ref = cfg.get_double("control.lambda_ref", cp.lambda_ref);
  cp.k_fis = cfg.get_double("control.k_fis", cp.k_fis);
  cp.fis_authority_v =
      cfg.get_double("control.fis_authority_v", cp.fis_authority_v);
  cp.regen_margin_v =
      cfg.get_double("control.regen_margin_v", cp.regen_margin_v);
  cp.v_max = cfg.get_double("motor.vmax", cp.v_max);
  if (cp.nz_max <= 0.0 || cp.v_max <= 0.0) {
    throw ConfigError("control saturation limits must be positive");
  }
  if (cp.lambda_ref <= 0.0 || cp.lambda_ref >= 1.0) {
    throw ConfigError("control.lambda_ref must lie in (0, 1)");
  }
  return cp;
}

}  // namespace edtsc
