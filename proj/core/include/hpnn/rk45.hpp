#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace hpnn {

// Dormand-Prince 5(4) with adaptive steps, FSAL, and the standard
// quartic dense-output interpolant; states sampled at fixed multiples of
// dt_out. Deterministic for a given right-hand side.
template <int N>
struct Rk45Result {
  std::vector<std::array<double, N>> states;  // at t0 + i*dt_out
  bool ok = true;          // false: step-size underflow or non-finite state
  double t_reached = 0.0;  // time of the last valid sample
};

template <int N, class Rhs>
Rk45Result<N> rk45_integrate(const Rhs& rhs, const std::array<double, N>& x0, double t0,
                             double t1, double dt_out, double rtol = 1e-9,
                             double atol = 1e-9) {
  using Vec = std::array<double, N>;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  Rk45Result<N> result;
  const std::size_t n_out = static_cast<std::size_t>(std::llround((t1 - t0) / dt_out)) + 1;
  result.states.reserve(n_out);
  result.states.push_back(x0);
  result.t_reached = t0;

  Vec y = x0;
  Vec k1 = rhs(t0, y);
  double t = t0;
  double h = dt_out;  // initial guess; the controller adapts immediately
  const double hmin = 1e-14 * (t1 - t0);
  std::size_t next_out = 1;
  bool rejected = false;

  auto finite = [](const Vec& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };

  while (next_out < n_out) {
    if (t + h > t1) h = t1 - t;
    Vec k2, k3, k4, k5, k6, k7, y1, yt;

    for (int i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(t + c2 * h, yt);
    for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, yt);
    for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, yt);
    for (int i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, yt);
    for (int i = 0; i < N; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, yt);
    for (int i = 0; i < N; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs(t + h, y1);

    if (!finite(y1) || !finite(k7)) {
      result.ok = false;
      return result;
    }

    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      // Dense output over [t, t+h] for every pending sample time.
      while (next_out < n_out) {
        const double ts = t0 + static_cast<double>(next_out) * dt_out;
        if (ts > t + h + 1e-12 * std::abs(t + h)) break;
        const double theta = std::min(1.0, std::max(0.0, (ts - t) / h));
        Vec u;
        for (int i = 0; i < N; ++i) {
          const double ydiff = y1[i] - y[i];
          const double r1 = y[i];
          const double r2 = ydiff;
          const double r3 = h * k1[i] - ydiff;
          const double r4 = ydiff - h * k7[i] - r3;
          const double r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                 d6 * k6[i] + d7 * k7[i]);
          u[i] = r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)));
        }
        result.states.push_back(u);
        result.t_reached = ts;
        ++next_out;
      }
      t += h;
      y = y1;
      k1 = k7;  // FSAL
      const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::min(rejected ? 1.0 : 10.0, std::max(0.2, fac));
      rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      rejected = true;
    }
    if (h < hmin) {
      result.ok = false;
      return result;
    }
  }
  return result;
}

}  // namespace hpnn
