#pragma once

#include <cmath>
#include <stdexcept>

namespace hpnn {

// Truncated Taylor scalar carrying a value, first derivatives along two
// independent seed directions (t and x), and the pure second derivative
// along x. Seeding an input t as (t, 1, 0, 0) and an input x as
// (x, 0, 1, 0) makes any arithmetic expression built from these propagate
// d/dt, d/dx and d2/dx2 exactly.
struct HyperDual {
  double val = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double dxx = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double v) : val(v) {}
  constexpr HyperDual(double v, double t, double x, double xx)
      : val(v), dt(t), dx(x), dxx(xx) {}

  static constexpr HyperDual seed_t(double t) { return {t, 1.0, 0.0, 0.0}; }
  static constexpr HyperDual seed_x(double x) { return {x, 0.0, 1.0, 0.0}; }

  HyperDual& operator+=(const HyperDual& o) {
    val += o.val;
    dt += o.dt;
    dx += o.dx;
    dxx += o.dxx;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    val -= o.val;
    dt -= o.dt;
    dx -= o.dx;
    dxx -= o.dxx;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    // Product rule on each component; the dxx rule carries the cross term.
    dxx = dxx * o.val + 2.0 * dx * o.dx + val * o.dxx;
    dt = dt * o.val + val * o.dt;
    dx = dx * o.val + val * o.dx;
    val *= o.val;
    return *this;
  }
};

inline constexpr HyperDual operator+(HyperDual a, const HyperDual& b) {
  return {a.val + b.val, a.dt + b.dt, a.dx + b.dx, a.dxx + b.dxx};
}
inline constexpr HyperDual operator-(HyperDual a, const HyperDual& b) {
  return {a.val - b.val, a.dt - b.dt, a.dx - b.dx, a.dxx - b.dxx};
}
inline constexpr HyperDual operator-(const HyperDual& a) {
  return {-a.val, -a.dt, -a.dx, -a.dxx};
}
inline constexpr HyperDual operator*(const HyperDual& a, const HyperDual& b) {
  return {a.val * b.val,
          a.dt * b.val + a.val * b.dt,
          a.dx * b.val + a.val * b.dx,
          a.dxx * b.val + 2.0 * a.dx * b.dx + a.val * b.dxx};
}
inline constexpr HyperDual operator*(const HyperDual& a, double c) {
  return {a.val * c, a.dt * c, a.dx * c, a.dxx * c};
}
inline constexpr HyperDual operator*(double c, const HyperDual& a) { return a * c; }
inline constexpr HyperDual operator+(const HyperDual& a, double c) {
  return {a.val + c, a.dt, a.dx, a.dxx};
}
inline constexpr HyperDual operator+(double c, const HyperDual& a) { return a + c; }
inline constexpr HyperDual operator-(const HyperDual& a, double c) { return a + (-c); }
inline constexpr HyperDual operator-(double c, const HyperDual& a) { return (-a) + c; }

inline HyperDual operator/(const HyperDual& a, const HyperDual& b) {
  if (b.val == 0.0) throw std::domain_error("HyperDual division by value zero");
  const double inv = 1.0 / b.val;
  const double v = a.val * inv;
  const double t = (a.dt - v * b.dt) * inv;
  const double x = (a.dx - v * b.dx) * inv;
  const double xx = (a.dxx - 2.0 * x * b.dx - v * b.dxx) * inv;
  return {v, t, x, xx};
}
inline HyperDual operator/(const HyperDual& a, double c) { return a * (1.0 / c); }
inline HyperDual operator/(double c, const HyperDual& a) { return HyperDual(c) / a; }

// Unary chain rule: for c = f(a),
//   c.val = f(a.val), c.dt = f'*a.dt, c.dx = f'*a.dx,
//   c.dxx = f'*a.dxx + f''*a.dx^2.
inline HyperDual unary_chain(const HyperDual& a, double f, double f1, double f2) {
  return {f, f1 * a.dt, f1 * a.dx, f1 * a.dxx + f2 * a.dx * a.dx};
}

inline HyperDual tanh(const HyperDual& a) {
  const double u = std::tanh(a.val);
  const double f1 = 1.0 - u * u;
  return unary_chain(a, u, f1, -2.0 * u * f1);
}
inline HyperDual sin(const HyperDual& a) {
  const double s = std::sin(a.val), c = std::cos(a.val);
  return unary_chain(a, s, c, -s);
}
inline HyperDual cos(const HyperDual& a) {
  const double s = std::sin(a.val), c = std::cos(a.val);
  return unary_chain(a, c, -s, -c);
}
inline HyperDual exp(const HyperDual& a) {
  const double e = std::exp(a.val);
  return unary_chain(a, e, e, e);
}
inline HyperDual sqrt(const HyperDual& a) {
  if (a.val <= 0.0) throw std::domain_error("HyperDual sqrt of non-positive value");
  const double r = std::sqrt(a.val);
  const double f1 = 0.5 / r;
  return unary_chain(a, r, f1, -0.5 * f1 / a.val);
}
inline HyperDual square(const HyperDual& a) { return unary_chain(a, a.val * a.val, 2.0 * a.val, 2.0); }

// Overloads so templated numeric code works for both double and HyperDual.
inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.val; }

}  // namespace hpnn
