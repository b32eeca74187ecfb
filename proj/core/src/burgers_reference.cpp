#include "hpnn/burgers_reference.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <sstream>

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"

namespace hpnn::burgers {

namespace {

// One pseudo-spectral solve on the odd periodic extension (period 2, grid
// x_j = -1 + 2j/N). The initial condition -sin(pi x) is odd and Burgers
// preserves the symmetry, so the Dirichlet boundary u(+-1) = 0 holds by
// construction. Diffusion is integrated exactly per mode; the advection
// term -d/dx(u^2/2) is advanced with integrating-factor RK4 under a CFL
// bound, 2/3-rule dealiased.
class SpectralRun {
 public:
  SpectralRun(double nu, int n_grid, int nt_out) : nu_(nu), n_(n_grid), nt_(nt_out) {
    nm_ = n_ / 2 + 1;
    real_.resize(n_);
    spec_.resize(nm_);
    plan_fwd_ = fftw_plan_dft_r2c_1d(n_, real_.data(),
                                     reinterpret_cast<fftw_complex*>(spec_.data()),
                                     FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_1d(n_, reinterpret_cast<fftw_complex*>(spec_.data()),
                                     real_.data(), FFTW_ESTIMATE);
  }
  ~SpectralRun() {
    fftw_destroy_plan(plan_fwd_);
    fftw_destroy_plan(plan_bwd_);
  }
  SpectralRun(const SpectralRun&) = delete;
  SpectralRun& operator=(const SpectralRun&) = delete;

  // Returns snapshots of u on the closed grid (n_+1 points) at nt_ times,
  // and optionally the sine-mode coefficients per snapshot.
  void run(std::vector<double>& rows, std::vector<double>* sine_coeffs, int keep_modes) {
    const int dealias = n_ / 3;
    std::vector<std::complex<double>> u(nm_), a(nm_), b(nm_), c(nm_), d(nm_), tmp(nm_);

    std::vector<double> ic(n_);
    for (int j = 0; j < n_; ++j) ic[j] = -std::sin(M_PI * (-1.0 + 2.0 * j / n_));
    to_spec(ic, u);

    const double t_end = 1.0;
    const double dt_snap = t_end / (nt_ - 1);
    const double kmax = M_PI * (n_ / 2);
    const double cfl_dt = 0.5 / (1.5 * kmax);
    const int steps_per_snap = std::max(1, static_cast<int>(std::ceil(dt_snap / cfl_dt)));
    const double h = dt_snap / steps_per_snap;

    std::vector<double> e_half(nm_), e_full(nm_);
    for (int m = 0; m < nm_; ++m) {
      const double k = M_PI * m;
      e_half[m] = std::exp(-nu_ * k * k * h * 0.5);
      e_full[m] = e_half[m] * e_half[m];
    }

    rows.assign(static_cast<std::size_t>(nt_) * (n_ + 1), 0.0);
    if (sine_coeffs != nullptr)
      sine_coeffs->assign(static_cast<std::size_t>(nt_) * keep_modes, 0.0);
    snapshot(u, 0, rows, sine_coeffs, keep_modes);

    for (int snap = 1; snap < nt_; ++snap) {
      for (int step = 0; step < steps_per_snap; ++step) {
        nonlinear(u, a, dealias);
        for (int m = 0; m < nm_; ++m) tmp[m] = e_half[m] * (u[m] + (0.5 * h) * a[m]);
        nonlinear(tmp, b, dealias);
        for (int m = 0; m < nm_; ++m) tmp[m] = e_half[m] * u[m] + (0.5 * h) * b[m];
        nonlinear(tmp, c, dealias);
        for (int m = 0; m < nm_; ++m) tmp[m] = e_full[m] * u[m] + e_half[m] * (h * c[m]);
        nonlinear(tmp, d, dealias);
        for (int m = 0; m < nm_; ++m)
          u[m] = e_full[m] * u[m] +
                 (h / 6.0) * (e_full[m] * a[m] + 2.0 * e_half[m] * (b[m] + c[m]) + d[m]);
      }
      snapshot(u, snap, rows, sine_coeffs, keep_modes);
    }
  }

 private:
  void to_spec(std::vector<double>& g, std::vector<std::complex<double>>& out) {
    std::memcpy(real_.data(), g.data(), sizeof(double) * n_);
    fftw_execute(plan_fwd_);
    for (int m = 0; m < nm_; ++m) out[m] = spec_[m] / static_cast<double>(n_);
  }

  void to_grid(const std::vector<std::complex<double>>& in, std::vector<double>& g) {
    std::copy(in.begin(), in.end(), spec_.begin());
    fftw_execute(plan_bwd_);
    g.assign(real_.begin(), real_.end());
  }

  // out = -d/dx (u^2/2), dealiased
  void nonlinear(const std::vector<std::complex<double>>& u_spec,
                 std::vector<std::complex<double>>& out, int dealias) {
    to_grid(u_spec, work_);
    for (int j = 0; j < n_; ++j) work_[j] = 0.5 * work_[j] * work_[j];
    to_spec(work_, out);
    for (int m = 0; m < nm_; ++m) {
      if (m > dealias || m == n_ / 2) {
        out[m] = 0.0;
      } else {
        out[m] *= std::complex<double>(0.0, -M_PI * m);
      }
    }
  }

  void snapshot(const std::vector<std::complex<double>>& u_spec, int snap,
                std::vector<double>& rows, std::vector<double>* sine_coeffs, int keep_modes) {
    to_grid(u_spec, work_);
    double* row = &rows[static_cast<std::size_t>(snap) * (n_ + 1)];
    for (int j = 0; j < n_; ++j) row[j] = work_[j];
    row[n_] = work_[0];  // x = +1 equals x = -1 by periodicity (both 0 by oddness)
    if (sine_coeffs != nullptr) {
      // With x = -1 + 2j/N, a component c_m sin(m pi x) lands in r2c mode
      // m as c_m * (-1)^m * (-i/2); invert that map.
      for (int m = 1; m <= keep_modes && m < n_ / 2; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        (*sine_coeffs)[static_cast<std::size_t>(snap) * keep_modes + (m - 1)] =
            -2.0 * sign * u_spec[m].imag();
      }
    }
  }

  double nu_;
  int n_, nt_, nm_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spec_;
  std::vector<double> work_;
  fftw_plan plan_fwd_;
  fftw_plan plan_bwd_;
};

}  // namespace

double ReferenceSolution::interp(double tq, double xq) const {
  const std::size_t nt = t.size(), nx = x.size();
  const double ft = std::clamp(tq, 0.0, 1.0) / (t[1] - t[0]);
  const double fx = (std::clamp(xq, -1.0, 1.0) + 1.0) / (x[1] - x[0]);
  std::size_t it = std::min(static_cast<std::size_t>(ft), nt - 2);
  std::size_t ix = std::min(static_cast<std::size_t>(fx), nx - 2);
  const double wt = ft - it, wx = fx - ix;
  return (1 - wt) * ((1 - wx) * at(it, ix) + wx * at(it, ix + 1)) +
         wt * ((1 - wx) * at(it + 1, ix) + wx * at(it + 1, ix + 1));
}

double ReferenceSolution::max_abs_row(std::size_t it) const {
  double m = 0.0;
  for (std::size_t ix = 0; ix < x.size(); ++ix) m = std::max(m, std::abs(at(it, ix)));
  return m;
}

namespace {

std::vector<double> run_once(double nu, int n_grid, int nt_out) {
  SpectralRun run(nu, n_grid, nt_out);
  std::vector<double> rows;
  run.run(rows, nullptr, 0);
  return rows;
}

}  // namespace

ReferenceSolution solve_reference(double nu, int nt_out, int nx_start, double refine_tol) {
  if (nu <= 0.0) throw ConfigError("solve_reference: nu must be positive");
  if (nt_out < 4) throw ConfigError("solve_reference: nt_out must be >= 4");

  constexpr int kMaxGrid = 16384;
  int n = nx_start;
  std::vector<double> coarse = run_once(nu, n, nt_out);
  double achieved = 1e300;

  while (2 * n <= kMaxGrid) {
    std::vector<double> fine = run_once(nu, 2 * n, nt_out);
    double diff = 0.0;
    for (int it = 0; it < nt_out; ++it)
      for (int j = 0; j <= n; ++j)
        diff = std::max(diff, std::abs(coarse[static_cast<std::size_t>(it) * (n + 1) + j] -
                                       fine[static_cast<std::size_t>(it) * (2 * n + 1) + 2 * j]));
    achieved = diff;
    if (diff < refine_tol) {
      ReferenceSolution ref;
      ref.nu = nu;
      ref.method = "fourier_ifrk4";
      ref.achieved_tol = diff;
      ref.t.resize(nt_out);
      for (int it = 0; it < nt_out; ++it) ref.t[it] = static_cast<double>(it) / (nt_out - 1);
      const int nf = 2 * n;
      ref.x.resize(nf + 1);
      for (int j = 0; j <= nf; ++j) ref.x[j] = -1.0 + 2.0 * j / nf;
      ref.values = std::move(fine);
      return ref;
    }
    coarse = std::move(fine);
    n *= 2;
  }
  std::ostringstream os;
  os << "solve_reference(nu=" << nu << "): refinement stalled at grid " << kMaxGrid
     << ", achieved tolerance " << achieved << " (requested " << refine_tol << ")";
  throw NumericError(os.str());
}

SpectralSolution solve_reference_modal(double nu, int nt_out, int n_grid, int keep_modes) {
  SpectralRun run(nu, n_grid, nt_out);
  std::vector<double> rows;
  SpectralSolution sol;
  sol.nu = nu;
  sol.n_modes = keep_modes;
  sol.t.resize(nt_out);
  for (int it = 0; it < nt_out; ++it) sol.t[it] = static_cast<double>(it) / (nt_out - 1);
  run.run(rows, &sol.coeffs, keep_modes);
  return sol;
}

double cole_hopf_u(double t, double x, double nu, int quad_points) {
  const GaussHermite gh = gauss_hermite(quad_points);
  return cole_hopf_solution<double>(t, x, nu, gh);
}

void save_reference(const ReferenceSolution& ref, const std::string& path) {
  BinWriter w(path);
  w.tag("BREF");
  w.u32(1);
  w.f64(ref.nu);
  w.u32(static_cast<std::uint32_t>(ref.t.size()));
  w.u32(static_cast<std::uint32_t>(ref.x.size()));
  char method[16] = {};
  std::snprintf(method, sizeof(method), "%s", ref.method.c_str());
  for (char ch : method) w.u8(static_cast<std::uint8_t>(ch));
  w.f64(ref.achieved_tol);
  w.f64_array(ref.t);
  w.f64_array(ref.x);
  w.f64_array(ref.values);
  if (!w.good()) throw DataError("short write: " + path);
}

ReferenceSolution load_reference(const std::string& path) {
  BinReader r(path);
  r.expect_tag("BREF", "reference solution");
  if (r.u32() != 1) throw DataError("reference file " + path + ": unsupported version");
  ReferenceSolution ref;
  ref.nu = r.f64();
  const std::uint32_t nt = r.u32(), nx = r.u32();
  if (nt < 2 || nx < 2 || nt > 100000 || nx > 1000000)
    throw DataError("reference file " + path + ": implausible grid shape");
  char method[17] = {};
  for (int i = 0; i < 16; ++i) method[i] = static_cast<char>(r.u8());
  ref.method = method;
  ref.achieved_tol = r.f64();
  ref.t.resize(nt);
  ref.x.resize(nx);
  ref.values.resize(static_cast<std::size_t>(nt) * nx);
  r.f64_array(ref.t);
  r.f64_array(ref.x);
  r.f64_array(ref.values);
  return ref;
}

}  // namespace hpnn::burgers
