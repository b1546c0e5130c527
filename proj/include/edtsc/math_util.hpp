#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace edtsc {

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

inline double deg2rad(double d) { return d * M_PI / 180.0; }

// --- small fixed-size linear algebra (2-state problems only) ---------------

struct Vec2 {
  double x0 = 0.0, x1 = 0.0;
  double& operator[](int i) { return i == 0 ? x0 : x1; }
  double operator[](int i) const { return i == 0 ? x0 : x1; }
};

struct Mat2 {
  // row-major: [a b; c d]
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Vec2 operator*(const Vec2& v) const { return {a * v.x0 + b * v.x1, c * v.x0 + d * v.x1}; }
  Mat2 transpose() const { return {a, c, b, d}; }
  double det() const { return a * d - b * c; }
  Mat2 inverse() const {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  double trace() const { return a + d; }
};

inline Vec2 operator+(const Vec2& u, const Vec2& v) { return {u.x0 + v.x0, u.x1 + v.x1}; }
inline Vec2 operator-(const Vec2& u, const Vec2& v) { return {u.x0 - v.x0, u.x1 - v.x1}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x0, s * v.x1}; }

// Eigenvalues of a real 2x2 matrix; returns real parts with imag parts.
struct Eig2 {
  double re0, im0, re1, im1;
};
inline Eig2 eigenvalues(const Mat2& m) {
  const double tr = m.trace();
  const double disc = tr * tr / 4.0 - m.det();
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {tr / 2.0 - s, 0.0, tr / 2.0 + s, 0.0};
  }
  const double s = std::sqrt(-disc);
  return {tr / 2.0, -s, tr / 2.0, s};
}

// --- discrete first-order filters -------------------------------------------

// One-pole low-pass, exact zero-order-hold discretization of w_c/(s+w_c).
class LowPass1 {
 public:
  LowPass1() = default;
  LowPass1(double omega_c, double dt)
      : alpha_(std::exp(-omega_c * dt)) {}

  double step(double x) {
    if (!primed_) {
      y_ = x;  // initialize on first sample to avoid a startup transient
      primed_ = true;
    } else {
      y_ = alpha_ * y_ + (1.0 - alpha_) * x;
    }
    return y_;
  }
  double value() const { return y_; }
  void reset(double y) { y_ = y; primed_ = true; }

 private:
  double alpha_ = 0.0;
  double y_ = 0.0;
  bool primed_ = false;
};

// Causal filtered differentiator: low-pass at omega_c, then backward difference.
class FilteredDerivative {
 public:
  FilteredDerivative() = default;
  FilteredDerivative(double omega_c, double dt) : lp_(omega_c, dt), dt_(dt) {}

  double step(double x) {
    const double y = lp_.step(x);
    const double d = primed_ ? (y - prev_) / dt_ : 0.0;
    prev_ = y;
    primed_ = true;
    return d;
  }

 private:
  LowPass1 lp_;
  double dt_ = 1.0;
  double prev_ = 0.0;
  bool primed_ = false;
};

// --- PID with output saturation and conditional-integration anti-windup -----

struct Pid {
  double kp = 0.0, ki = 0.0, kd = 0.0;
  double out_lo = -1e30, out_hi = 1e30;
  double integ = 0.0;
  double prev_err = 0.0;
  bool has_prev = false;

  double step(double err, double dt) {
    const double deriv = (has_prev && kd != 0.0) ? (err - prev_err) / dt : 0.0;
    prev_err = err;
    has_prev = true;
    const double integ_cand = integ + err * dt;
    const double u_unsat = kp * err + ki * integ_cand + kd * deriv;
    if (u_unsat > out_hi) {
      if (err < 0.0) integ = integ_cand;  // only allow unwinding
      return out_hi;
    }
    if (u_unsat < out_lo) {
      if (err > 0.0) integ = integ_cand;
      return out_lo;
    }
    integ = integ_cand;
    return u_unsat;
  }

  void reset() {
    integ = 0.0;
    prev_err = 0.0;
    has_prev = false;
  }
};

// --- series statistics -------------------------------------------------------

inline double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double peak_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

// Pearson correlation with mean centering; nullopt when either series has
// (numerically) zero variance.
inline std::optional<double> pearson(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return std::nullopt;
  // Exact constancy check: a constant series has zero variance even when the
  // mean below picks up rounding that would make saa/sbb spuriously positive.
  bool const_a = true, const_b = true;
  for (std::size_t i = 1; i < n; ++i) {
    const_a = const_a && a[i] == a[0];
    const_b = const_b && b[i] == b[0];
  }
  if (const_a || const_b) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace edtsc
