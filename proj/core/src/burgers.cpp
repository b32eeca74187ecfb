#include "hpnn/burgers.hpp"

#include <fstream>
#include <sstream>

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"

namespace hpnn::burgers {

BurgersDataset sample_dataset(std::uint64_t seed) {
  Rng rng(seed);
  BurgersDataset ds;
  ds.supervised.reserve(100);
  for (int i = 0; i < 50; ++i) {
    BurgersPoint p;
    p.t = 0.0;
    p.x = rng.uniform(-1.0, 1.0);
    p.u = -std::sin(M_PI * p.x);
    ds.supervised.push_back(p);
  }
  for (int i = 0; i < 50; ++i) {
    BurgersPoint p;
    p.t = rng.uniform(0.0, 1.0);
    p.x = rng.coin() ? 1.0 : -1.0;
    p.u = 0.0;
    ds.supervised.push_back(p);
  }
  return ds;
}

double sample_nu(Rng& rng) { return rng.uniform(kNuMin, kNuMax); }

std::vector<BurgersPoint> sample_collocation(std::size_t n, Rng& rng) {
  std::vector<BurgersPoint> pts(n);
  for (BurgersPoint& p : pts) {
    p.t = rng.uniform(0.0, 1.0);
    p.x = rng.uniform(-1.0, 1.0);
    p.nu = sample_nu(rng);
  }
  return pts;
}

double residual(const HyperDual& u, double nu) { return u.dt + u.val * u.dx - nu * u.dxx; }

Tape::Id residual_on_tape(Tape& tape, Tape::Id u, double nu) {
  const Tape::Id advect = tape.mul(tape.val_part(u), tape.dx_part(u));
  return tape.sub(tape.add(tape.dt_part(u), advect), tape.scale(tape.dxx_part(u), nu));
}

double predict_main(const ArchSpec& main_spec, std::span<const double> theta_m, double t,
                    double x) {
  const std::array<double, 2> in{2.0 * t - 1.0, x};
  return mlp_forward<double>(main_spec, theta_m, in)[0];
}

HyperDual predict_main_hd(const ArchSpec& main_spec, std::span<const double> theta_m, double t,
                          double x) {
  const std::array<HyperDual, 2> in{seed_time(t), HyperDual::seed_x(x)};
  return mlp_forward<HyperDual>(main_spec, theta_m, in)[0];
}

double predict(const Model& model, double t, double x, double nu) {
  if (model.is_hyper()) {
    const ParamVector theta_m = generate_main(model.as_hyper(), {{embed_nu(nu)}});
    return predict_main(model.main_spec, theta_m.values, t, x);
  }
  const std::array<double, 3> in{2.0 * t - 1.0, x, embed_nu(nu)};
  return mlp_forward<double>(model.main_spec, model.params.values, in)[0];
}

HyperDual predict_hd(const Model& model, double t, double x, double nu) {
  if (model.is_hyper()) {
    const ParamVector theta_m = generate_main(model.as_hyper(), {{embed_nu(nu)}});
    return predict_main_hd(model.main_spec, theta_m.values, t, x);
  }
  const std::array<HyperDual, 3> in{seed_time(t), HyperDual::seed_x(x),
                                    HyperDual(embed_nu(nu))};
  return mlp_forward<HyperDual>(model.main_spec, model.params.values, in)[0];
}

Tape::Id predict_on_tape(Tape& tape, const Model& model, Tape::Id theta, double t, double x,
                         double nu, bool seeded) {
  Tape::Id theta_main = theta;
  Tape::Id in;
  if (model.is_hyper()) {
    const Tape::Id lam = tape.constant(embed_nu(nu));
    theta_main = mlp_on_tape(tape, model.hyper_spec, theta, lam);
    in = seeded ? tape.input(seed_time(t)) : tape.constant(2.0 * t - 1.0);
    if (seeded) tape.input_x(x);
    else tape.constant(x);
  } else {
    in = seeded ? tape.input(seed_time(t)) : tape.constant(2.0 * t - 1.0);
    if (seeded) tape.input_x(x);
    else tape.constant(x);
    tape.constant(embed_nu(nu));
  }
  return mlp_on_tape(tape, model.main_spec, theta_main, in);
}

GradResult pinn_loss(const Model& model, std::span<const double> theta,
                     const std::vector<BurgersPoint>& data_batch,
                     const std::vector<BurgersPoint>& collocation_batch, double alpha) {
  if (data_batch.empty()) throw ConfigError("pinn_loss: empty data batch");
  if (collocation_batch.empty()) throw ConfigError("pinn_loss: empty collocation batch");

  // One tape per evaluation; the workspace keeps its capacity across the
  // hot training loop.
  thread_local Tape tape;
  tape.reset();
  const Tape::Id theta_id = tape.leaf_block(theta);

  Tape::Id data_sum = Tape::kNone;
  for (const BurgersPoint& p : data_batch) {
    const Tape::Id u = predict_on_tape(tape, model, theta_id, p.t, p.x, p.nu, false);
    const Tape::Id sq = tape.square(tape.shift(u, -p.u));
    data_sum = (data_sum == Tape::kNone) ? sq : tape.add(data_sum, sq);
  }

  Tape::Id phys_sum = Tape::kNone;
  for (const BurgersPoint& p : collocation_batch) {
    const Tape::Id u = predict_on_tape(tape, model, theta_id, p.t, p.x, p.nu, true);
    const Tape::Id sq = tape.square(residual_on_tape(tape, u, p.nu));
    phys_sum = (phys_sum == Tape::kNone) ? sq : tape.add(phys_sum, sq);
  }

  const Tape::Id total = tape.add(data_sum, tape.scale(phys_sum, alpha));
  tape.backward(total);

  GradResult g;
  g.loss_value = tape.value(total).val;
  g.data_loss = tape.value(data_sum).val;
  g.physics_loss = tape.value(phys_sum).val;
  g.gradient.resize(theta.size());
  tape.leaf_gradient(theta_id, theta.size(), g.gradient);
  return g;
}

const std::vector<double>& test_nus() {
  static const std::vector<double> nus{0.0017, 0.003, 0.007, 0.015, 0.03, 0.06, 0.09};
  return nus;
}

namespace {

const ReferenceSolution& ref_for(const std::vector<ReferenceSolution>& refs, double nu) {
  for (const ReferenceSolution& r : refs)
    if (std::abs(r.nu - nu) < 1e-12) return r;
  throw ConfigError("evaluate_mse: missing reference solution for nu=" +
                    std::to_string(nu));
}

template <class F>
void for_each_lattice_point(const F& f) {
  for (int it = 0; it < kEvalNt; ++it) {
    const double t = static_cast<double>(it) / (kEvalNt - 1);
    for (int ix = 0; ix < kEvalNx; ++ix) {
      const double x = -1.0 + 2.0 * static_cast<double>(ix) / (kEvalNx - 1);
      f(t, x);
    }
  }
}

}  // namespace

MseReport evaluate_mse(const Model& model, const std::vector<ReferenceSolution>& refs) {
  MseReport report;
  double total = 0.0;
  for (double nu : test_nus()) {
    const ReferenceSolution& ref = ref_for(refs, nu);
    std::vector<double> theta_m;
    if (model.is_hyper())
      theta_m = generate_main(model.as_hyper(), {{embed_nu(nu)}}).values;
    double acc = 0.0;
    for_each_lattice_point([&](double t, double x) {
      const double pred = model.is_hyper()
                              ? predict_main(model.main_spec, theta_m, t, x)
                              : predict(model, t, x, nu);
      const double err = pred - ref.interp(t, x);
      acc += err * err;
    });
    const double mse = acc / (static_cast<double>(kEvalNt) * kEvalNx);
    report.per_nu.emplace_back(nu, mse);
    total += mse;
  }
  report.overall = total / static_cast<double>(report.per_nu.size());
  return report;
}

double max_pointwise_error(const Model& model, const ReferenceSolution& ref) {
  std::vector<double> theta_m;
  if (model.is_hyper())
    theta_m = generate_main(model.as_hyper(), {{embed_nu(ref.nu)}}).values;
  double worst = 0.0;
  for_each_lattice_point([&](double t, double x) {
    const double pred = model.is_hyper() ? predict_main(model.main_spec, theta_m, t, x)
                                         : predict(model, t, x, ref.nu);
    worst = std::max(worst, std::abs(pred - ref.interp(t, x)));
  });
  return worst;
}

void save_dataset(const BurgersDataset& ds, const std::string& path) {
  CsvWriter csv(path, {"kind", "t", "x", "u"});
  for (const BurgersPoint& p : ds.supervised)
    csv.row({p.t == 0.0 ? "ic" : "bc", CsvWriter::num(p.t), CsvWriter::num(p.x),
             CsvWriter::num(p.u)});
}

BurgersDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "kind,t,x,u")
    throw DataError("dataset file " + path + ": unexpected header");
  BurgersDataset ds;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind, tf, xf, uf;
    if (!std::getline(ls, kind, ',') || !std::getline(ls, tf, ',') ||
        !std::getline(ls, xf, ',') || !std::getline(ls, uf))
      throw DataError("dataset file " + path + ": malformed row '" + line + "'");
    BurgersPoint p;
    p.t = std::stod(tf);
    p.x = std::stod(xf);
    p.u = std::stod(uf);
    ds.supervised.push_back(p);
  }
  if (ds.supervised.size() != 100)
    throw DataError("dataset file " + path + ": expected 100 supervised points, got " +
                    std::to_string(ds.supervised.size()));
  return ds;
}

}  // namespace hpnn::burgers
