#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpnn/burgers_reference.hpp"
#include "hpnn/model.hpp"
#include "hpnn/rng.hpp"
#include "hpnn/tape.hpp"

namespace hpnn::burgers {

// One sample of the Burgers problem: supervised points carry a solution
// value (initial or boundary data), collocation points only a location.
// Every point carries its own viscosity draw.
struct BurgersPoint {
  double t = 0.0;   // [0, 1]
  double x = 0.0;   // [-1, 1]
  double u = 0.0;   // solution value; meaningful for supervised points
  double nu = 0.0;  // [0.001, 0.1]
};

inline constexpr double kNuMin = 0.001;
inline constexpr double kNuMax = 0.1;

struct BurgersDataset {
  std::vector<BurgersPoint> supervised;  // 50 initial-condition + 50 boundary points
};

// 50 IC points (t=0, x ~ U[-1,1], u = -sin(pi x)) and 50 BC points
// (t ~ U[0,1], x = +-1, u = 0). Viscosities are re-drawn per training
// batch, not fixed here.
BurgersDataset sample_dataset(std::uint64_t seed);
double sample_nu(Rng& rng);
std::vector<BurgersPoint> sample_collocation(std::size_t n, Rng& rng);

// Input embeddings shared by training and evaluation: time is mapped to
// [-1,1] (the seed carries the factor 2 chain rule), x passes through,
// and nu enters the nets on a log scale since it spans two decades.
inline double embed_nu(double nu) { return std::log10(nu) + 2.0; }
inline HyperDual seed_time(double t) { return {2.0 * t - 1.0, 2.0, 0.0, 0.0}; }

// PDE residual u_t + u u_x - nu u_xx from a network output evaluated on
// seeded inputs.
double residual(const HyperDual& u, double nu);
Tape::Id residual_on_tape(Tape& tape, Tape::Id u, double nu);

// Model predictions. For the hypernetwork model, theta_m can be
// pre-generated once per nu (predict_main); predict() regenerates it.
double predict_main(const ArchSpec& main_spec, std::span<const double> theta_m, double t,
                    double x);
HyperDual predict_main_hd(const ArchSpec& main_spec, std::span<const double> theta_m, double t,
                          double x);
double predict(const Model& model, double t, double x, double nu);
HyperDual predict_hd(const Model& model, double t, double x, double nu);

// u_hat(t, x; nu) recorded on a tape with theta as a node range; seeded
// selects derivative-carrying inputs (collocation) vs constants (data).
// Matches predict_hd / predict exactly for equal theta.
Tape::Id predict_on_tape(Tape& tape, const Model& model, Tape::Id theta, double t, double x,
                         double nu, bool seeded);

// Sum-of-squares data loss plus alpha times the sum-of-squares residual
// loss, with the gradient over theta (theta_h for the hypernetwork,
// theta for baselines).
GradResult pinn_loss(const Model& model, std::span<const double> theta,
                     const std::vector<BurgersPoint>& data_batch,
                     const std::vector<BurgersPoint>& collocation_batch, double alpha);

// Held-out viscosities (log-spaced across the training range, including
// the shock-figure case 0.003); never used for tuning.
const std::vector<double>& test_nus();

inline constexpr int kEvalNt = 100;  // t_i = i/99
inline constexpr int kEvalNx = 256;  // x_j = -1 + 2j/255

struct MseReport {
  std::vector<std::pair<double, double>> per_nu;  // (nu, mse over the lattice)
  double overall = 0.0;
};

// Mean over viscosities and the evaluation lattice of (u_hat - u_ref)^2.
// refs must cover every requested nu.
MseReport evaluate_mse(const Model& model, const std::vector<ReferenceSolution>& refs);
double max_pointwise_error(const Model& model, const ReferenceSolution& ref);

// Supervised dataset files (CSV: kind,t,x,u).
void save_dataset(const BurgersDataset& ds, const std::string& path);
BurgersDataset load_dataset(const std::string& path);

}  // namespace hpnn::burgers
