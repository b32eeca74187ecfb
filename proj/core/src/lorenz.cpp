#include "hpnn/lorenz.hpp"

#include <cmath>

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"
#include "hpnn/rk45.hpp"

namespace hpnn::lorenz {

State rhs(const State& s, const LorenzParams& p) {
  return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1],
          s[0] * s[1] - p.beta * s[2]};
}

Trajectory simulate(const LorenzParams& params, const State& x0, double duration, double dt) {
  auto f = [&params](double, const State& s) { return rhs(s, params); };
  Rk45Result<3> r = rk45_integrate<3>(f, x0, 0.0, duration, dt, kRk45Tol, kRk45Tol);
  if (!r.ok) throw NumericError("lorenz::simulate: integrator failed to advance");
  Trajectory traj;
  traj.params = params;
  traj.x0 = x0;
  traj.dt = dt;
  traj.states = std::move(r.states);
  return traj;
}

LorenzParams sample_params(Rng& rng) {
  LorenzParams p;
  p.sigma = 10.0;
  p.rho = rng.uniform(0.0, 28.0);
  p.beta = rng.uniform(2.0 / 3.0, 8.0 / 3.0);
  return p;
}

LorenzDataset generate_dataset(std::uint64_t seed) {
  Rng rng(seed);
  LorenzDataset ds;
  ds.train.reserve(3000);
  for (int ip = 0; ip < 30; ++ip) {
    const LorenzParams p = sample_params(rng);
    for (int ic = 0; ic < 100; ++ic) {
      State x0{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
      ds.train.push_back(simulate(p, x0));
    }
  }
  ds.test.reserve(100);
  for (int i = 0; i < 100; ++i) {
    const LorenzParams p = sample_params(rng);
    State x0{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    ds.test.push_back(simulate(p, x0));
  }
  return ds;
}

State trapezoid_residual(const StepPair& pair) {
  const State fp = rhs(pair.x_prev, pair.params);
  const State fn = rhs(pair.x_next, pair.params);
  State r;
  for (int c = 0; c < 3; ++c)
    r[c] = pair.x_next[c] - pair.x_prev[c] - 0.5 * pair.dt * (fn[c] + fp[c]);
  return r;
}

State main_net_deriv(const ArchSpec& main_spec, std::span<const double> theta_m,
                     const State& s) {
  const std::array<double, 3> in{s[0] * kStateScale, s[1] * kStateScale, s[2] * kStateScale};
  const std::vector<double> out = mlp_forward<double>(main_spec, theta_m, in);
  return {out[0] * kOutputScale, out[1] * kOutputScale, out[2] * kOutputScale};
}

State model_deriv(const Model& model, const State& s, const LorenzParams& p) {
  if (model.is_hyper()) {
    const auto ep = embed_params(p);
    const ParamVector theta_m = generate_main(model.as_hyper(), {{ep[0], ep[1], ep[2]}});
    return main_net_deriv(model.main_spec, theta_m.values, s);
  }
  const auto ep = embed_params(p);
  const std::array<double, 6> in{s[0] * kStateScale, s[1] * kStateScale, s[2] * kStateScale,
                                 ep[0], ep[1], ep[2]};
  const std::vector<double> out = mlp_forward<double>(model.main_spec, model.params.values, in);
  return {out[0] * kOutputScale, out[1] * kOutputScale, out[2] * kOutputScale};
}

namespace {

// Records the model's f(state) on the tape and returns the first of three
// contiguous scaled output nodes. theta_main is the generated main
// parameter range (hyper) or the leaf block (baselines).
Tape::Id deriv_on_tape(Tape& tape, const Model& model, Tape::Id theta_main, const State& s,
                       const LorenzParams& p) {
  const Tape::Id in = tape.constant(s[0] * kStateScale);
  tape.constant(s[1] * kStateScale);
  tape.constant(s[2] * kStateScale);
  if (!model.is_hyper()) {
    const auto ep = embed_params(p);
    tape.constant(ep[0]);
    tape.constant(ep[1]);
    tape.constant(ep[2]);
  }
  const Tape::Id raw = mlp_on_tape(tape, model.main_spec, theta_main, in);
  const Tape::Id out = tape.scale(raw, kOutputScale);
  tape.scale(raw + 1, kOutputScale);
  tape.scale(raw + 2, kOutputScale);
  return out;
}

}  // namespace

GradResult multistep_loss(const Model& model, std::span<const double> theta,
                          const std::vector<StepPair>& pairs) {
  if (pairs.empty()) throw ConfigError("multistep_loss: empty batch");

  thread_local Tape tape;
  tape.reset();
  const Tape::Id theta_id = tape.leaf_block(theta);
  Tape::Id total = Tape::kNone;

  for (const StepPair& pair : pairs) {
    Tape::Id theta_main = theta_id;
    if (model.is_hyper()) {
      const auto ep = embed_params(pair.params);
      const Tape::Id lam = tape.constant(ep[0]);
      tape.constant(ep[1]);
      tape.constant(ep[2]);
      theta_main = mlp_on_tape(tape, model.hyper_spec, theta_id, lam);
    }
    const Tape::Id f_prev = deriv_on_tape(tape, model, theta_main, pair.x_prev, pair.params);
    const Tape::Id f_next = deriv_on_tape(tape, model, theta_main, pair.x_next, pair.params);
    for (int c = 0; c < 3; ++c) {
      // x_next - x_prev - dt/2 (f_next + f_prev), as a scalar in the net outputs
      const Tape::Id fsum = tape.add(f_next + c, f_prev + c);
      const Tape::Id resid =
          tape.shift(tape.scale(fsum, -0.5 * pair.dt), pair.x_next[c] - pair.x_prev[c]);
      const Tape::Id sq = tape.square(resid);
      total = (total == Tape::kNone) ? sq : tape.add(total, sq);
    }
  }

  tape.backward(total);
  GradResult g;
  g.loss_value = tape.value(total).val;
  g.data_loss = g.loss_value;
  g.physics_loss = 0.0;
  g.gradient.resize(theta.size());
  tape.leaf_gradient(theta_id, theta.size(), g.gradient);
  return g;
}

RolloutScore rollout_and_score_fn(const DerivFn& deriv, const std::vector<Trajectory>& test) {
  constexpr double kCap = 1200.0;  // (20*sqrt(3))^2, squared domain diameter

  RolloutScore score;
  score.per_trajectory.reserve(test.size());
  score.capped.reserve(test.size());

  for (const Trajectory& truth : test) {
    auto f = [&](double, const State& s) -> State { return deriv(s, truth.params); };
    const double duration = truth.dt * static_cast<double>(truth.states.size() - 1);
    Rk45Result<3> r = rk45_integrate<3>(f, truth.x0, 0.0, duration, truth.dt, kRk45Tol, kRk45Tol);

    bool flagged = !r.ok || r.states.size() < truth.states.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.states.size(); ++i) {
      double d2;
      if (i < r.states.size()) {
        d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = r.states[i][c] - truth.states[i][c];
          d2 += d * d;
        }
        if (!std::isfinite(d2) || d2 > kCap) {
          d2 = kCap;
          flagged = true;
        }
      } else {
        d2 = kCap;  // integrator stopped early; remaining samples score the cap
      }
      acc += d2;
    }
    score.per_trajectory.push_back(acc / static_cast<double>(truth.states.size()));
    score.capped.push_back(flagged ? 1 : 0);
  }

  for (double e : score.per_trajectory) score.aggregate += e;
  if (!score.per_trajectory.empty())
    score.aggregate /= static_cast<double>(score.per_trajectory.size());
  return score;
}

RolloutScore rollout_and_score(const Model& model, const std::vector<Trajectory>& test) {
  if (model.is_hyper()) {
    // Generate the main parameters once per parameterization, not per
    // right-hand-side evaluation.
    std::vector<double> theta_m;
    LorenzParams cached{};
    bool have = false;
    auto deriv = [&, model](const State& s, const LorenzParams& p) -> State {
      if (!have || p.sigma != cached.sigma || p.beta != cached.beta || p.rho != cached.rho) {
        const auto ep = embed_params(p);
        theta_m = generate_main(model.as_hyper(), {{ep[0], ep[1], ep[2]}}).values;
        cached = p;
        have = true;
      }
      return main_net_deriv(model.main_spec, theta_m, s);
    };
    return rollout_and_score_fn(deriv, test);
  }
  return rollout_and_score_fn(
      [&model](const State& s, const LorenzParams& p) { return model_deriv(model, s, p); },
      test);
}

void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path) {
  BinWriter w(path);
  w.tag("LTRJ");
  w.u32(1);
  w.u64(trajs.size());
  for (const Trajectory& t : trajs) {
    w.f64(t.params.sigma);
    w.f64(t.params.beta);
    w.f64(t.params.rho);
    for (double v : t.x0) w.f64(v);
    w.f64(t.dt);
    w.u64(t.states.size());
    for (const State& s : t.states)
      for (double v : s) w.f64(v);
  }
  if (!w.good()) throw DataError("short write: " + path);
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
  BinReader r(path);
  r.expect_tag("LTRJ", "trajectory");
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw DataError("trajectory file " + path + ": unsupported version");
  const std::uint64_t n = r.u64();
  if (n > 1000000) throw DataError("trajectory file: implausible count");
  std::vector<Trajectory> trajs(n);
  for (Trajectory& t : trajs) {
    t.params.sigma = r.f64();
    t.params.beta = r.f64();
    t.params.rho = r.f64();
    for (double& v : t.x0) v = r.f64();
    t.dt = r.f64();
    const std::uint64_t len = r.u64();
    if (len == 0 || len > 100000000) throw DataError("trajectory file: implausible length");
    t.states.resize(len);
    for (State& s : t.states)
      for (double& v : s) v = r.f64();
    if (t.states[0] != t.x0) throw DataError("trajectory file: first state != x0");
  }
  return trajs;
}

}  // namespace hpnn::lorenz
