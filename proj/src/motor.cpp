#include "edtsc/motor.hpp"

#include "edtsc/math_util.hpp"

namespace edtsc {

MotorDeriv motor_derivatives(const MotorState& s, double V_cmd, double T_L,
                             const MotorParams& mp) {
  MotorDeriv d;
  d.domega_m = (mp.K_t * s.current - mp.K_f * s.omega_m - T_L) / mp.J;
  d.dcurrent = (-mp.R_w * s.current - mp.K_b * s.omega_m + V_cmd) / mp.L_w;
  return d;
}

MotorParams motor_params_from(const Config& cfg) {
  MotorParams m;
  m.J_m = cfg.get_double("motor.jm_kgm2", m.J_m);
  m.K_t = cfg.get_double("motor.kt", m.K_t);
  m.K_f = cfg.get_double("motor.kf", m.K_f);
  m.K_b = cfg.get_double("motor.kb", m.K_b);
  m.R_w = cfg.get_double("motor.rw_ohm", m.R_w);
  m.L_w = cfg.get_double("motor.lw_h", m.L_w);
  m.F_c = cfg.get_double("motor.fc_nm", m.F_c);
  m.V_max = cfg.get_double("motor.vmax", m.V_max);
  m.I_max = cfg.get_double("motor.imax", m.I_max);
  if (m.J_m <= 0 || m.K_t <= 0 || m.K_f <= 0 || m.K_b <= 0 || m.R_w <= 0 ||
      m.L_w <= 0 || m.F_c < 0 || m.V_max <= 0 || m.I_max <= 0)
    throw ConfigError("motor parameters out of range");
  return m;
}

}  // namespace edtsc
