#pragma once

#include <cmath>

#include "edtsc/config.hpp"
#include "edtsc/math_util.hpp"
#include "edtsc/plant.hpp"

namespace edtsc {

// Nominal motor model used by the disturbance observer.
struct NominalPlant {
  double J_n = 0.0;    // nominal combined inertia [kg m^2]
  double K_tn = 0.5;   // nominal torque constant
  double K_fn = 0.01;  // nominal friction constant
};

// Reaction-torque observer. The improper inverse-plant form
//   T_D = K_tn*I - K_fn*omega - J_n*domega
// is realized derivative-free through a first-order Q-filter Q(s)=w_c/(s+w_c):
//   T_D_hat = Q*(K_tn*I - K_fn*omega) - J_n*w_c*(omega - Q*omega)
// which is algebraically identical in the Laplace domain.
class DisturbanceObserver {
 public:
  DisturbanceObserver() = default;
  DisturbanceObserver(double omega_c, double dt, const NominalPlant& np)
      : omega_c_(omega_c), np_(np), q_torque_(omega_c, dt), q_speed_(omega_c, dt) {}

  // One measurement update; returns the disturbance torque estimate [N m].
  double step(double current, double omega_m) {
    const double zt = q_torque_.step(np_.K_tn * current - np_.K_fn * omega_m);
    const double zw = q_speed_.step(omega_m);
    T_D_hat_ = zt - np_.J_n * omega_c_ * (omega_m - zw);
    return T_D_hat_;
  }

  double T_D_hat() const { return T_D_hat_; }
  double omega_c() const { return omega_c_; }

 private:
  double omega_c_ = 50.0;
  NominalPlant np_;
  LowPass1 q_torque_;
  LowPass1 q_speed_;
  double T_D_hat_ = 0.0;
};

// Reaction torque = observed disturbance minus Coulomb friction.
inline double reaction_torque(double T_D_hat, double F_c) { return T_D_hat - F_c; }

struct SlipEstimatorParams {
  double omega_min = 1.0;    // release threshold on motor speed [rad/s]
  double lambda_max = 0.999; // upper clamp
  double f_gate = 0.0;       // minimum drive force for integration [N]
  double tau_release = 0.2;  // relaxation time constant when gated [s]
};

// Slip-ratio estimator for one driven wheel, built only on motor-side signals
// (speed, filtered acceleration) and observed reaction torque — no vehicle
// speed sensor. Integrates, per wheel i:
//   dlambda_i = (1-lambda_i)*domega_m/omega_m - (F_drive_total - F_drag(V_i))/(M*V_w,i)
// where V_w,i = (r/G)*omega_m,i is the wheel surface speed, F_drive_total is
// the summed drive force of all motors (G*T_R_hat/r each), and V_i =
// V_w,i*(1-lambda_i) is the estimator's own vehicle-speed reconstruction used
// to evaluate the drag model.
//
// The balance only carries slip information while the wheels are actually
// driven. Outside that envelope — standstill, coast, or regenerative braking —
// the integral would dead-reckon on model residue alone (and the drag term
// turns into positive feedback as the speed reconstruction sags), so the
// estimate instead relaxes exponentially toward free rolling.
class SlipEstimator {
 public:
  SlipEstimator() = default;
  SlipEstimator(const SlipEstimatorParams& p) : p_(p) {}

  // F_drive_total: summed drive force estimate of both motors [N].
  // Returns the updated slip estimate.
  double step(double omega_m, double domega_m, double F_drive_total, double dt,
              const VehicleParams& vp) {
    if (omega_m <= p_.omega_min || F_drive_total <= p_.f_gate) {
      lambda_ *= std::exp(-dt / p_.tau_release);  // undriven: relax to 0
      return lambda_;
    }
    const double V_w = vp.r * omega_m / vp.G;
    const double V_hat = V_w * (1.0 - lambda_);
    const double F_drag = 0.5 * vp.rho * vp.CdA * V_hat * V_hat;
    const double dlambda = (1.0 - lambda_) * domega_m / omega_m -
                           (F_drive_total - F_drag) / (vp.M * V_w);
    lambda_ = clamp(lambda_ + dt * dlambda, 0.0, p_.lambda_max);
    return lambda_;
  }

  double lambda_hat() const { return lambda_; }
  void reset(double l = 0.0) { lambda_ = l; }

 private:
  SlipEstimatorParams p_;
  double lambda_ = 0.0;
};

struct ObserverParams {
  double omega_c = 50.0;  // Q-filter / differentiator cutoff [rad/s]
  NominalPlant nominal;
  SlipEstimatorParams slip;
};

ObserverParams observer_params_from(const Config& cfg);

}  // namespace edtsc
