#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hpnn/model.hpp"
#include "hpnn/rng.hpp"
#include "hpnn/tape.hpp"

namespace hpnn::lorenz {

using State = std::array<double, 3>;

struct LorenzParams {
  double sigma = 10.0;
  double beta = 8.0 / 3.0;
  double rho = 28.0;
};

// sigma*(y-x), x*(rho-z)-y, x*y-beta*z
State rhs(const State& s, const LorenzParams& p);

struct Trajectory {
  LorenzParams params;
  State x0{};
  double dt = 0.01;
  std::vector<State> states;  // states[0] == x0
};

struct StepPair {
  State x_prev{};
  State x_next{};
  LorenzParams params;
  double dt = 0.01;
};

inline constexpr double kDuration = 25.0;
inline constexpr double kDt = 0.01;
inline constexpr double kRk45Tol = 1e-9;

// Adaptive integration of the exact dynamics, sampled at dt. Throws
// NumericError if the integrator cannot advance.
Trajectory simulate(const LorenzParams& params, const State& x0, double duration = kDuration,
                    double dt = kDt);

struct LorenzDataset {
  std::vector<Trajectory> train;  // 30 parameter draws x 100 initial conditions
  std::vector<Trajectory> test;   // 100 fresh (parameter, initial condition) draws
};

// sigma = 10 fixed, rho ~ U[0,28], beta ~ U[2/3,8/3], x0 ~ U[-10,10]^3.
LorenzDataset generate_dataset(std::uint64_t seed);
LorenzParams sample_params(Rng& rng);

// Residual of the two-step trapezoid rule with the exact right-hand side;
// the oracle the multistep loss is checked against.
State trapezoid_residual(const StepPair& pair);

// Fixed input/output embeddings shared by training and evaluation. Raw
// states reach |x| ~ 45 and raw derivatives ~ 400, far outside tanh's
// useful range, so the nets see scaled states and emit scaled derivatives.
inline constexpr double kStateScale = 0.05;
inline constexpr double kOutputScale = 100.0;
inline std::array<double, 3> embed_params(const LorenzParams& p) {
  return {p.sigma / 10.0, p.beta - 5.0 / 3.0, p.rho / 14.0 - 1.0};
}

// Model-predicted time derivative. For the hypernetwork model the main
// parameters are generated per call; rollouts pre-generate them instead.
State model_deriv(const Model& model, const State& s, const LorenzParams& p);
State main_net_deriv(const ArchSpec& main_spec, std::span<const double> theta_m,
                     const State& s);

// Sum over pairs and state components of the squared trapezoid residual
// with f replaced by the model's prediction; gradient over theta.
GradResult multistep_loss(const Model& model, std::span<const double> theta,
                          const std::vector<StepPair>& pairs);

struct RolloutScore {
  double aggregate = 0.0;             // mean over trajectories of per-trajectory error
  std::vector<double> per_trajectory; // time-mean squared Euclidean deviation
  std::vector<std::uint8_t> capped;   // 1 when the deviation cap or integrator guard hit
};

// Integrates the learned dynamics from each test trajectory's x0 with the
// same integrator settings and scores against ground truth. Squared
// deviations are capped at the domain diameter (20*sqrt(3))^2 so unstable
// learned dynamics still score finitely; such trajectories are flagged.
RolloutScore rollout_and_score(const Model& model, const std::vector<Trajectory>& test);

// Same scoring with an arbitrary dynamics function (used to score the
// exact right-hand side and other oracles).
using DerivFn = std::function<State(const State&, const LorenzParams&)>;
RolloutScore rollout_and_score_fn(const DerivFn& f, const std::vector<Trajectory>& test);

// Trajectory container files (.ltrj): per-trajectory header (params, x0,
// dt, length) followed by the state array, all little-endian.
void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path);
std::vector<Trajectory> load_trajectories(const std::string& path);

}  // namespace hpnn::lorenz
