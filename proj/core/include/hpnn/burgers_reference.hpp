#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hpnn/gauss_hermite.hpp"
#include "hpnn/hyperdual.hpp"

namespace hpnn::burgers {

// Ground-truth solution of u_t + u u_x = nu u_xx on t in [0,1],
// x in [-1,1], u(0,x) = -sin(pi x), u(t,+-1) = 0, sampled on a uniform
// closed (t, x) lattice.
struct ReferenceSolution {
  double nu = 0.0;
  std::vector<double> t;       // nt snapshot times
  std::vector<double> x;       // nx grid points including both boundaries
  std::vector<double> values;  // row-major [nt][nx]
  std::string method;
  double achieved_tol = 0.0;

  double at(std::size_t it, std::size_t ix) const { return values[it * x.size() + ix]; }
  double interp(double tq, double xq) const;  // bilinear
  double max_abs_row(std::size_t it) const;
};

// Fourier pseudo-spectral solve (sine basis via the odd periodic
// extension, 2/3 dealiasing, integrating-factor RK4 in time), refined by
// doubling the resolution until two successive solutions agree to
// refine_tol in max norm. Throws NumericError when the refinement cannot
// reach the tolerance, reporting the achieved value.
ReferenceSolution solve_reference(double nu, int nt_out = 513, int nx_start = 1024,
                                  double refine_tol = 1e-4);

// Modal history of the same solve; evaluable at arbitrary (t, x) with
// smooth derivatives (cubic in t, analytic in x), so residual checks can
// run it through HyperDual arithmetic.
struct SpectralSolution {
  double nu = 0.0;
  std::vector<double> t;        // snapshot times
  int n_modes = 0;              // u(t,x) = sum_{m>=1} c_m(t) sin(m pi x)
  std::vector<double> coeffs;   // row-major [nt][n_modes]

  template <class T>
  T eval(const T& tq, const T& xq) const {
    using std::sin;  // HyperDual overloads found by ADL
    const double tv = value_of(tq);
    const std::size_t nt = t.size();
    // cubic Lagrange window in time
    std::size_t i1 = static_cast<std::size_t>(
        std::max(0.0, std::floor(tv / (t[1] - t[0]))));
    if (i1 + 1 >= nt) i1 = nt - 2;
    const std::size_t i0 = (i1 == 0) ? 0 : i1 - 1;
    const std::size_t i3 = std::min(nt - 1, i1 + 2);
    std::size_t idx[4] = {i0, i1, i1 + 1, i3};
    if (idx[0] == idx[1]) {  // shift window at the left edge
      idx[0] = 0; idx[1] = 1; idx[2] = 2; idx[3] = 3;
    }
    if (idx[2] == idx[3]) {  // right edge
      idx[0] = nt - 4; idx[1] = nt - 3; idx[2] = nt - 2; idx[3] = nt - 1;
    }
    T basis[4];
    for (int a = 0; a < 4; ++a) {
      T L = T{} + 1.0;
      for (int b = 0; b < 4; ++b) {
        if (a == b) continue;
        L = L * ((tq - t[idx[b]]) * (1.0 / (t[idx[a]] - t[idx[b]])));
      }
      basis[a] = L;
    }
    T u = T{};
    for (int m = 1; m <= n_modes; ++m) {
      T cm = T{};
      for (int a = 0; a < 4; ++a)
        cm += basis[a] * coeffs[idx[a] * n_modes + (m - 1)];
      u += cm * sin(xq * (M_PI * m));
    }
    return u;
  }
};

SpectralSolution solve_reference_modal(double nu, int nt_out = 129, int n_grid = 1024,
                                       int keep_modes = 256);

// Closed-form Cole-Hopf solution evaluated by Gauss-Hermite quadrature;
// the independent oracle for the solver. Accurate for nu >= ~0.01; below
// that the transformed integrand is too sharp for fixed-order quadrature.
template <class T>
T cole_hopf_solution(const T& tq, const T& xq, double nu, const GaussHermite& gh) {
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;
  if (value_of(tq) <= 0.0) return -sin(xq * M_PI);
  const T s = sqrt(tq * nu) * 2.0;  // kernel width 2*sqrt(nu t)
  const int n = static_cast<int>(gh.nodes.size());
  // phi0(y) = exp((1 - cos(pi y)) / (2 pi nu)); the shared maximum is
  // subtracted before exponentiating since the raw exponent reaches
  // 1/(pi nu) and the ratio is shift-invariant.
  std::vector<T> expo(n);
  double emax = -1e300;
  for (int i = 0; i < n; ++i) {
    const T y = xq - s * gh.nodes[i];
    expo[i] = (1.0 - cos(y * M_PI)) * (1.0 / (2.0 * M_PI * nu));
    emax = std::max(emax, value_of(expo[i]));
  }
  T num = T{}, den = T{};
  for (int i = 0; i < n; ++i) {
    const T w = exp(expo[i] - emax) * gh.weights[i];
    den += w;
    num += w * gh.nodes[i];
  }
  // u = (1/t) <x - y> = (2 sqrt(nu t)/t) <z>
  return (s / tq) * (num / den);
}

double cole_hopf_u(double t, double x, double nu, int quad_points = 150);

// Reference cache files (.bref).
void save_reference(const ReferenceSolution& ref, const std::string& path);
ReferenceSolution load_reference(const std::string& path);

}  // namespace hpnn::burgers
