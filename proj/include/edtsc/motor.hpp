#pragma once

#include "edtsc/config.hpp"

namespace edtsc {

// DC-equivalent drive motor. The combined inertia J refers the wheel inertia
// to the (faster) motor shaft: J = J_m + J_w / G^2.
struct MotorParams {
  double J_m = 1.26e-2;   // rotor inertia [kg m^2]
  double K_t = 0.5;       // torque constant [N m / A]
  double K_f = 0.01;      // viscous friction [N m s / rad]
  double K_b = 0.04;      // back-EMF constant [V s / rad]
  double R_w = 7.0e-3;    // winding resistance [ohm]
  double L_w = 7.6e-5;    // winding inductance [H]
  double F_c = 0.5;       // Coulomb friction torque [N m]
  double V_max = 48.0;    // supply voltage limit [V]
  double I_max = 400.0;   // inverter/battery current limit [A]
  double J = 0.0;         // combined inertia [kg m^2], cached via cache_J()

  void cache_J(double J_w, double G) { J = J_m + J_w / (G * G); }
};

struct MotorState {
  double omega_m = 0.0;  // rotor speed [rad/s]
  double current = 0.0;  // winding current [A]
};

struct MotorDeriv {
  double domega_m = 0.0;  // [rad/s^2]
  double dcurrent = 0.0;  // [A/s]
};

// Electrical + mechanical dynamics:
//   J * domega = K_t*I - K_f*omega - T_L
//   L * dI     = -R*I - K_b*omega + V
// T_L is supplied by the caller as F_c*sign(omega) + r*Fx/G (reaction torque
// referred through the gear to the motor shaft).
MotorDeriv motor_derivatives(const MotorState& s, double V_cmd, double T_L,
                             const MotorParams& mp);

MotorParams motor_params_from(const Config& cfg);

}  // namespace edtsc
