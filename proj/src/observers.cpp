#include "edtsc/observers.hpp"

#include "edtsc/motor.hpp"

namespace edtsc {

ObserverParams observer_params_from(const Config& cfg) {
  ObserverParams o;
  o.omega_c = cfg.get_double("observer.omega_c", o.omega_c);
  if (o.omega_c <= 0) throw ConfigError("observer.omega_c must be positive");

  // Nominal plant defaults to the true motor constants (identified model).
  const MotorParams m = motor_params_from(cfg);
  const VehicleParams v = vehicle_params_from(cfg);
  o.nominal.K_tn = cfg.get_double("observer.ktn", m.K_t);
  o.nominal.K_fn = cfg.get_double("observer.kfn", m.K_f);
  o.nominal.J_n = cfg.get_double("observer.jn", m.J_m + v.J_w / (v.G * v.G));

  o.slip.omega_min = cfg.get_double("slip_est.omega_min", o.slip.omega_min);
  o.slip.lambda_max = cfg.get_double("slip_est.lambda_max", o.slip.lambda_max);
  o.slip.f_gate = cfg.get_double("slip_est.f_gate", o.slip.f_gate);
  o.slip.tau_release =
      cfg.get_double("slip_est.tau_release", o.slip.tau_release);
  if (o.slip.tau_release <= 0) {
    throw ConfigError("slip_est.tau_release must be positive");
  }
  return o;
}

}  // namespace edtsc
