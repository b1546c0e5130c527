#pragma once

#include <array>

#include "edtsc/config.hpp"

namespace edtsc {

// Axis convention used throughout: x forward, y to the RIGHT, z down.
// Positive yaw rate gamma and positive steering delta mean a right-hand turn.
// Note for readers of related literature: here `v` is the longitudinal and
// `u` the lateral body velocity (some sources use the opposite letters);
// this matches the source conventions the controller formulas were taken from.

struct VehicleParams {
  double M = 260.0;        // vehicle mass [kg]
  double I_z = 60.0;       // yaw inertia [kg m^2]
  double l_f = 0.83;       // CoG to front axle [m]
  double l_r = 0.70;       // CoG to rear axle [m]
  double w = 1.2;          // track width [m]
  double J_w = 0.23;       // wheel spin inertia [kg m^2]
  double r = 0.23;         // wheel radius [m]
  double G = 4.0;          // gear ratio, motor speed / wheel speed
  double h_cg = 0.30;      // CoG height [m]
  double CdA = 1.0;        // drag area [m^2]
  double rho = 1.225;      // air density [kg m^-3]
  double g = 9.81;         // gravity [m s^-2]

  double L() const { return l_f + l_r; }
};

struct TireParams {
  double mu = 1.4;        // friction coefficient
  double B_x = 12.0;      // longitudinal stiffness shape factor
  double C_x = 1.6;       // longitudinal curvature shape factor
  double B_y_front = 9.0; // lateral stiffness shape factor, front axle
  double B_y_rear = 11.0; // lateral stiffness shape factor, rear axle
  double C_y = 1.5;       // lateral curvature shape factor
  // Slip-ratio denominators are regularized with this wheel-surface speed so
  // the wheel-spin eigenvalue stays inside the explicit integrator's
  // stability region at low speed. Above v_reg the force curve is untouched.
  double v_reg = 8.0;     // [m/s]
};

// Ground-truth planar state: pose, body velocities, yaw rate, and the two
// rear (driven) wheel spin speeds. Front wheels roll freely and generate
// lateral force only.
struct VehicleState {
  double x = 0.0;         // global position [m]
  double y = 0.0;         // global position [m]
  double psi = 0.0;       // heading [rad]
  double v = 0.0;         // longitudinal body velocity [m/s]
  double u = 0.0;         // lateral body velocity [m/s]
  double gamma = 0.0;     // yaw rate [rad/s]
  double omega_rl = 0.0;  // rear-left wheel spin [rad/s]
  double omega_rr = 0.0;  // rear-right wheel spin [rad/s]
};

struct TireForce {
  double Fx = 0.0;  // longitudinal force in the wheel plane [N]
  double Fy = 0.0;  // lateral force in the wheel plane [N]
  double Fz = 0.0;  // normal load [N]
};

// Pure-slip simplified magic formula with a radial friction-ellipse clamp.
// `alpha` is the slip angle in the sense that positive alpha produces
// positive (turn-holding) lateral force; by_axle selects the axle's B_y.
// Throws NumericError on negative Fz (load-transfer overflow).
std::pair<double, double> tire_force(double lambda, double alpha, double Fz,
                                     const TireParams& tp, double by_axle);

struct WheelLoads {
  double fl = 0.0, fr = 0.0, rl = 0.0, rr = 0.0;  // [N]
  double front_axle() const { return fl + fr; }
  double rear_axle() const { return rl + rr; }
};

// Quasi-static normal loads: static split plus longitudinal transfer
// M*ax*h/(2L) front<->rear and lateral transfer M*ay*h/(2w) left<->right per
// axle; each wheel floored at zero.
WheelLoads normal_loads(double ax, double ay, const VehicleParams& vp);

// Everything the force model produces in one evaluation, reused by the
// integrator, the measurement path, and the logger.
struct ForceBreakdown {
  WheelLoads loads;
  TireForce fl, fr, rl, rr;       // per-wheel forces (wheel frame)
  double alpha_fl = 0.0, alpha_fr = 0.0, alpha_rl = 0.0, alpha_rr = 0.0;
  double lambda_rl = 0.0, lambda_rr = 0.0;       // regularized slip (force input)
  double lambda_true_rl = 0.0, lambda_true_rr = 0.0;  // logged slip ratio
  double F_drag = 0.0;            // aerodynamic drag [N]
  double sum_Fx_body = 0.0;       // body-frame force sums incl. drag
  double sum_Fy_body = 0.0;
  double yaw_moment = 0.0;        // [N m]
  double ax_body = 0.0;           // body-frame specific force [m/s^2]
  double ay_body = 0.0;
};

// Evaluates tire and aero forces at the given state. ax/ay are the load
// transfer accelerations (previous step's body specific forces).
ForceBreakdown evaluate_forces(const VehicleState& s, double delta, double ax,
                               double ay, const VehicleParams& vp,
                               const TireParams& tp);

// Time derivative of the vehicle state for given steering and rear wheel
// drive torques (wheel side). Wheel spin: J_w * domega = T - r*Fx.
// Throws NumericError if the derivative is not finite.
VehicleState vehicle_derivatives(const VehicleState& s, double delta,
                                 double T_rl, double T_rr, double ax, double ay,
                                 const VehicleParams& vp, const TireParams& tp);

// Linear-range cornering stiffness per wheel at load Fz: d(Fy)/d(alpha) at 0.
inline double linear_cornering_stiffness(double Fz, const TireParams& tp, double by_axle) {
  return tp.mu * Fz * by_axle * tp.C_y;
}

VehicleParams vehicle_params_from(const Config& cfg);
TireParams tire_params_from(const Config& cfg);

}  // namespace edtsc
