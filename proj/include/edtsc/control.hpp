#pragma once

#include "edtsc/config.hpp"
#include "edtsc/fis.hpp"
#include "edtsc/math_util.hpp"
#include "edtsc/plant.hpp"

namespace edtsc {

struct ControlParams {
  double yaw_kp = 200.0;     // yaw-rate PI -> corrective moment request [N m per rad/s]
  double yaw_ki = 50.0;
  double nz_max = 500.0;     // yaw moment request saturation [N m]
  double slip_kp = 20.0;     // slip PID -> voltage cut [V per unit slip]
  double slip_ki = 60.0;
  double slip_kd = 0.0;
  double lambda_ref = 0.1;   // slip target
  double k_fis = 0.05;       // multiplicative FIS correction gain (throttle path)
  double fis_authority_v = 4.0;  // additive FIS authority during coast [V]
  double regen_margin_v = 0.35;  // allowed dip below back-EMF on throttle path [V]
  double v_max = 48.0;       // command ceiling [V]
};

struct ControlCommand {
  double v_left = 0.0;   // [V]
  double v_right = 0.0;  // [V]
};

// Kinematic differential split: R = L/tan(delta) (signed), wheel radii
// R +- w/2, V_i = (R_i/R) * V_cmd. delta = 0 is the equal-split limit.
// Identity: V_l + V_r = 2 V_cmd for all delta.
ControlCommand differential_split(double V_cmd, double delta,
                                  const VehicleParams& vp);

// Yaw-rate PI producing the corrective yaw moment request N_z. The request
// feeds the slip-angle observer's input model and the log; actuation flows
// through the FIS voltage corrections. Feed desired-minus-actual yaw rate so
// the moment opposes the error.
class YawMomentPi {
 public:
  YawMomentPi() = default;
  explicit YawMomentPi(const ControlParams& cp) {
    pid_.kp = cp.yaw_kp;
    pid_.ki = cp.yaw_ki;
    pid_.out_lo = -cp.nz_max;
    pid_.out_hi = cp.nz_max;
  }
  double step(double err, double dt) { return pid_.step(err, dt); }

 private:
  Pid pid_;
};

// One-sided traction PID: cuts voltage (output <= 0) when the slip estimate
// exceeds the reference. Realized as an upper saturation at 0 with
// conditional-integration anti-windup, so a fresh controller outputs exactly
// 0 with a frozen integral while slip is below the reference.
class SlipLimiterPid {
 public:
  SlipLimiterPid() = default;
  explicit SlipLimiterPid(const ControlParams& cp) {
    pid_.kp = cp.slip_kp;
    pid_.ki = cp.slip_ki;
    pid_.kd = cp.slip_kd;
    pid_.out_lo = -cp.v_max;
    pid_.out_hi = 0.0;
  }
  double step(double lambda_hat, double lambda_ref, double dt) {
    return pid_.step(lambda_ref - lambda_hat, dt);
  }

 private:
  Pid pid_;
};

// Voltage composition for the throttle (track) path:
//   V = T_dem * V_max -> differential split -> *(1 + k_fis * v_corr_i)
//   -> + dV_traction_i -> regen floor max(V_i, K_b*omega_i - regen_margin)
//   -> clamp [0, V_max].
// The regen floor is inactive at standstill (it is negative there).
ControlCommand compose_commands(double T_dem, double delta,
                                const FISOutput& fis, double dV_l, double dV_r,
                                double omega_m_l, double omega_m_r, double K_b,
                                const ControlParams& cp,
                                const VehicleParams& vp);

// Coast-phase composition (lane-change protocol, throttle released): commands
// ride each wheel's zero-current voltage K_b*omega and the FIS acts
// additively with a fixed voltage authority.
ControlCommand compose_commands_coast(const FISOutput& fis, double dV_l,
                                      double dV_r, double omega_m_l,
                                      double omega_m_r, double K_b,
                                      const ControlParams& cp);

ControlParams control_params_from(const Config& cfg);

}  // namespace edtsc
