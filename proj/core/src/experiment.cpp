#include "hpnn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"
#include "hpnn/model_io.hpp"
#include "hpnn/rk45.hpp"

namespace hpnn {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid value for '" + key + "': " + v);
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid value for '" + key + "': " + v);
  }
}

}  // namespace

TrainingConfig default_training(Problem p) {
  TrainingConfig cfg;
  if (p == Problem::kBurgers) {
    cfg.iterations = 20000;
    cfg.batch_data = 100;
    cfg.batch_collocation = 1024;
  } else {
    cfg.iterations = 20000;
    cfg.batch_data = 256;
    cfg.batch_collocation = 1024;  // unused by the multistep loss
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  training.validate();
  if (data_dir.empty() || out_dir.empty())
    throw ConfigError("data_dir and out_dir must be non-empty");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  std::string problem_str, model_str;
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key or value");
    if (key == "problem") problem_str = value;
    else if (key == "model") model_str = value;
    else entries.emplace_back(key, value);
  }
  if (problem_str.empty()) throw ConfigError(path + ": missing required key 'problem'");
  if (model_str.empty()) throw ConfigError(path + ": missing required key 'model'");

  ExperimentConfig cfg;
  cfg.problem = problem_from_string(problem_str);
  cfg.model = model_kind_from_string(model_str);
  cfg.training = default_training(cfg.problem);

  for (const auto& [key, value] : entries) {
    if (key == "learning_rate") cfg.training.learning_rate = parse_double(key, value);
    else if (key == "adam_beta1") cfg.training.adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") cfg.training.adam_beta2 = parse_double(key, value);
    else if (key == "adam_eps") cfg.training.adam_eps = parse_double(key, value);
    else if (key == "iterations") cfg.training.iterations = parse_long(key, value);
    else if (key == "batch_data") cfg.training.batch_data = parse_long(key, value);
    else if (key == "batch_collocation") cfg.training.batch_collocation = parse_long(key, value);
    else if (key == "alpha") cfg.training.alpha = parse_double(key, value);
    else if (key == "seed") cfg.training.seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "lr_decay") cfg.training.lr_decay = parse_double(key, value);
    else if (key == "data_dir") cfg.data_dir = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else throw ConfigError(path + ": unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::string burgers_dataset_path(const std::string& d) { return d + "/burgers_dataset.csv"; }
std::string burgers_reference_path(const std::string& d, double nu) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s/burgers_ref_nu%g.bref", d.c_str(), nu);
  return buf;
}
std::string lorenz_train_path(const std::string& d) { return d + "/lorenz_train.ltrj"; }
std::string lorenz_test_path(const std::string& d) { return d + "/lorenz_test.ltrj"; }
std::string model_file_path(const std::string& d, Problem p, ModelKind k) {
  return d + "/" + to_string(p) + "_" + to_string(k) + ".hpnn";
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

void refuse_existing(const std::vector<std::string>& paths, bool force) {
  if (force) return;
  for (const std::string& p : paths)
    if (file_exists(p))
      throw DataError("output file already exists (use --force to overwrite): " + p);
}

std::string generate_hint(Problem p) {
  return std::string("run `hyperpinn generate --problem ") + to_string(p) +
         " --out <data_dir>` first";
}

}  // namespace

void cmd_generate(Problem problem, std::uint64_t seed, const std::string& out_dir, bool force) {
  ensure_dir(out_dir);
  if (problem == Problem::kBurgers) {
    std::vector<std::string> targets{burgers_dataset_path(out_dir)};
    for (double nu : burgers::test_nus()) targets.push_back(burgers_reference_path(out_dir, nu));
    refuse_existing(targets, force);

    burgers::save_dataset(burgers::sample_dataset(seed), targets[0]);
    std::cout << "wrote " << targets[0] << " (100 supervised points)\n";
    for (double nu : burgers::test_nus()) {
      const burgers::ReferenceSolution ref = burgers::solve_reference(nu);
      burgers::save_reference(ref, burgers_reference_path(out_dir, nu));
      std::cout << "wrote " << burgers_reference_path(out_dir, nu) << " (" << ref.t.size() << "x"
                << ref.x.size() << " grid, method " << ref.method << ", tol "
                << ref.achieved_tol << ")\n";
    }
  } else {
    const std::vector<std::string> targets{lorenz_train_path(out_dir), lorenz_test_path(out_dir)};
    refuse_existing(targets, force);
    const lorenz::LorenzDataset ds = lorenz::generate_dataset(seed);
    lorenz::save_trajectories(ds.train, targets[0]);
    lorenz::save_trajectories(ds.test, targets[1]);
    std::cout << "wrote " << targets[0] << " (" << ds.train.size() << " trajectories)\n";
    std::cout << "wrote " << targets[1] << " (" << ds.test.size() << " trajectories)\n";
  }
}

LossClosure make_burgers_closure(const Model& model, const burgers::BurgersDataset& ds,
                                 const TrainingConfig& cfg) {
  const Model skeleton{model.problem, model.kind, model.main_spec, model.hyper_spec, {}};
  const std::vector<burgers::BurgersPoint> supervised = ds.supervised;
  const long batch_data = cfg.batch_data;
  const long batch_coll = cfg.batch_collocation;
  const double alpha = cfg.alpha;

  return [skeleton, supervised, batch_data, batch_coll, alpha](
             std::span<const double> theta, Rng& rng) -> GradResult {
    // Supervised batch: the stored (t, x, u) with freshly drawn nu per
    // point; subsampled without replacement when batch_data < dataset.
    std::vector<burgers::BurgersPoint> data;
    const std::size_t n = supervised.size();
    if (static_cast<std::size_t>(batch_data) >= n) {
      data = supervised;
    } else {
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      for (long k = 0; k < batch_data; ++k) {
        const std::size_t j = k + rng.index(n - k);
        std::swap(idx[k], idx[j]);
        data.push_back(supervised[idx[k]]);
      }
    }
    for (auto& p : data) p.nu = burgers::sample_nu(rng);
    const std::vector<burgers::BurgersPoint> coll =
        burgers::sample_collocation(static_cast<std::size_t>(batch_coll), rng);
    return burgers::pinn_loss(skeleton, theta, data, coll, alpha);
  };
}

LossClosure make_lorenz_closure(const Model& model,
                                const std::vector<lorenz::Trajectory>& train,
                                const TrainingConfig& cfg) {
  const Model skeleton{model.problem, model.kind, model.main_spec, model.hyper_spec, {}};
  const std::vector<lorenz::Trajectory>* trajs = &train;
  const long batch = cfg.batch_data;

  return [skeleton, trajs, batch](std::span<const double> theta, Rng& rng) -> GradResult {
    std::vector<lorenz::StepPair> pairs;
    pairs.reserve(static_cast<std::size_t>(batch));
    for (long k = 0; k < batch; ++k) {
      const lorenz::Trajectory& tr = (*trajs)[rng.index(trajs->size())];
      const std::size_t i = 1 + rng.index(tr.states.size() - 1);
      pairs.push_back({tr.states[i - 1], tr.states[i], tr.params, tr.dt});
    }
    return lorenz::multistep_loss(skeleton, theta, pairs);
  };
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);

  Model model = make_model(cfg.problem, cfg.model, cfg.training.seed);
  std::cout << "model " << to_string(cfg.problem) << "/" << to_string(cfg.model) << "\n";
  std::cout << "  main net:  " << describe(model.main_spec) << "\n";
  if (model.is_hyper()) std::cout << "  hypernet:  " << describe(model.hyper_spec) << "\n";

  LossClosure closure;
  if (cfg.problem == Problem::kBurgers) {
    const std::string ds_path = burgers_dataset_path(cfg.data_dir);
    if (!file_exists(ds_path))
      throw DataError("missing dataset " + ds_path + "; " + generate_hint(cfg.problem));
    const burgers::BurgersDataset ds = burgers::load_dataset(ds_path);
    closure = make_burgers_closure(model, ds, cfg.training);
  } else {
    const std::string tr_path = lorenz_train_path(cfg.data_dir);
    if (!file_exists(tr_path))
      throw DataError("missing trajectories " + tr_path + "; " + generate_hint(cfg.problem));
    // Keep the trajectory store alive inside the closure.
    auto trajs = std::make_shared<std::vector<lorenz::Trajectory>>(
        lorenz::load_trajectories(tr_path));
    LossClosure inner = make_lorenz_closure(model, *trajs, cfg.training);
    closure = [inner, trajs](std::span<const double> theta, Rng& rng) {
      return inner(theta, rng);
    };
  }

  TrainOutcome outcome;
  outcome.history_file = cfg.out_dir + "/" + to_string(cfg.problem) + "_" +
                         to_string(cfg.model) + "_history.csv";
  try {
    outcome.result = train(closure, model.params, cfg.training);
  } catch (const TrainingAborted& e) {
    // persist whatever history exists before surfacing the failure
    write_history_csv(e.history, outcome.history_file);
    throw;
  }
  model.params = outcome.result.params;
  outcome.model = model;

  outcome.model_file = model_file_path(cfg.out_dir, cfg.problem, cfg.model);
  save_model(model, outcome.model_file);
  write_history_csv(outcome.result.history, outcome.history_file);

  const HistoryRow& last = outcome.result.history.back();
  std::cout << "final losses: total " << last.total_loss << ", data " << last.data_loss
            << ", physics " << last.physics_loss << "\n";
  std::cout << "best loss " << outcome.result.best_loss << " at iteration "
            << outcome.result.best_iteration << "\n";
  std::cout << "wrote " << outcome.model_file << " and " << outcome.history_file << "\n";
  return outcome;
}

namespace {

EvaluateOutcome evaluate_burgers(const Model& model, const std::string& data_dir,
                                 const std::string& out_dir) {
  std::vector<burgers::ReferenceSolution> refs;
  for (double nu : burgers::test_nus()) {
    const std::string p = burgers_reference_path(data_dir, nu);
    if (!file_exists(p))
      throw DataError("missing reference " + p + "; " + generate_hint(Problem::kBurgers));
    refs.push_back(burgers::load_reference(p));
  }

  const burgers::MseReport report = burgers::evaluate_mse(model, refs);
  const std::string tag = std::string(to_string(model.problem)) + "_" + to_string(model.kind);

  EvaluateOutcome out;
  out.report_file = out_dir + "/" + tag + "_eval.csv";
  CsvWriter csv(out.report_file, {"model", "nu", "mse"});
  for (const auto& [nu, mse] : report.per_nu)
    csv.row({to_string(model.kind), CsvWriter::num(nu), CsvWriter::num(mse)});
  csv.row({to_string(model.kind), "overall", CsvWriter::num(report.overall)});
  out.primary_metric = report.overall;

  // Plot data for the shock case nu = 0.003.
  const burgers::ReferenceSolution* fig_ref = nullptr;
  for (const auto& r : refs)
    if (std::abs(r.nu - 0.003) < 1e-12) fig_ref = &r;
  out.plot_file = out_dir + "/" + tag + "_fig_nu0.003.csv";
  CsvWriter plot(out.plot_file, {"t", "x", "u_true", "u_pred"});
  std::vector<double> theta_m;
  if (model.is_hyper())
    theta_m = generate_main(model.as_hyper(), {{burgers::embed_nu(0.003)}}).values;
  for (int it = 0; it < burgers::kEvalNt; ++it) {
    const double t = static_cast<double>(it) / (burgers::kEvalNt - 1);
    for (int ix = 0; ix < burgers::kEvalNx; ++ix) {
      const double x = -1.0 + 2.0 * static_cast<double>(ix) / (burgers::kEvalNx - 1);
      const double pred = model.is_hyper()
                              ? burgers::predict_main(model.main_spec, theta_m, t, x)
                              : burgers::predict(model, t, x, 0.003);
      plot.row({CsvWriter::num(t), CsvWriter::num(x), CsvWriter::num(fig_ref->interp(t, x)),
                CsvWriter::num(pred)});
    }
  }

  std::cout << "overall held-out MSE: " << report.overall << "\n";
  for (const auto& [nu, mse] : report.per_nu)
    std::cout << "  nu=" << nu << ": mse " << mse << "\n";
  return out;
}

EvaluateOutcome evaluate_lorenz(const Model& model, const std::string& data_dir,
                                const std::string& out_dir) {
  const std::string te_path = lorenz_test_path(data_dir);
  if (!file_exists(te_path))
    throw DataError("missing trajectories " + te_path + "; " + generate_hint(Problem::kLorenz));
  const std::vector<lorenz::Trajectory> test = lorenz::load_trajectories(te_path);

  const lorenz::RolloutScore score = lorenz::rollout_and_score(model, test);
  const std::string tag = std::string(to_string(model.problem)) + "_" + to_string(model.kind);

  EvaluateOutcome out;
  out.report_file = out_dir + "/" + tag + "_eval.csv";
  CsvWriter csv(out.report_file,
                {"model", "sigma", "beta", "rho", "x0", "per_traj_error", "capped"});
  for (std::size_t i = 0; i < test.size(); ++i) {
    const lorenz::Trajectory& tr = test[i];
    std::string x0 = CsvWriter::num(tr.x0[0]) + ";" + CsvWriter::num(tr.x0[1]) + ";" +
                     CsvWriter::num(tr.x0[2]);
    csv.row({to_string(model.kind), CsvWriter::num(tr.params.sigma),
             CsvWriter::num(tr.params.beta), CsvWriter::num(tr.params.rho), x0,
             CsvWriter::num(score.per_trajectory[i]), std::to_string(score.capped[i])});
  }
  out.primary_metric = score.aggregate;

  std::size_t n_capped = 0;
  for (auto c : score.capped) n_capped += c;
  CsvWriter agg(out_dir + "/" + tag + "_aggregate.csv",
                {"model", "aggregate_error", "num_capped"});
  agg.row({to_string(model.kind), CsvWriter::num(score.aggregate), std::to_string(n_capped)});

  // Plot data: the sigma=10, beta=5/3, rho=21.7 case from a fixed start.
  const lorenz::LorenzParams fig_params{10.0, 5.0 / 3.0, 21.7};
  const lorenz::State fig_x0{1.0, 1.0, 1.0};
  const lorenz::Trajectory truth = lorenz::simulate(fig_params, fig_x0);

  out.plot_file = out_dir + "/" + tag + "_fig.csv";
  CsvWriter plot(out.plot_file,
                 {"t", "x_true", "y_true", "z_true", "x_pred", "y_pred", "z_pred"});
  // Re-integrate the model to get the predicted path for the figure.
  {
    std::vector<double> theta_m;
    std::span<const double> theta_span;
    if (model.is_hyper()) {
      const auto ep = lorenz::embed_params(fig_params);
      theta_m = generate_main(model.as_hyper(), {{ep[0], ep[1], ep[2]}}).values;
      theta_span = theta_m;
    }
    auto f = [&](double, const lorenz::State& s) -> lorenz::State {
      if (model.is_hyper()) return lorenz::main_net_deriv(model.main_spec, theta_span, s);
      return lorenz::model_deriv(model, s, fig_params);
    };
    Rk45Result<3> pred = rk45_integrate<3>(f, fig_x0, 0.0, lorenz::kDuration, lorenz::kDt,
                                           lorenz::kRk45Tol, lorenz::kRk45Tol);
    for (std::size_t i = 0; i < truth.states.size(); ++i) {
      const double t = lorenz::kDt * static_cast<double>(i);
      lorenz::State p{};
      if (i < pred.states.size()) p = pred.states[i];
      else if (!pred.states.empty()) p = pred.states.back();
      plot.row({CsvWriter::num(t), CsvWriter::num(truth.states[i][0]),
                CsvWriter::num(truth.states[i][1]), CsvWriter::num(truth.states[i][2]),
                CsvWriter::num(p[0]), CsvWriter::num(p[1]), CsvWriter::num(p[2])});
    }
  }

  std::cout << "aggregate rollout error: " << score.aggregate << " (" << n_capped
            << " capped trajectories)\n";
  return out;
}

}  // namespace

EvaluateOutcome cmd_evaluate(const std::string& model_file, Problem problem,
                             const std::string& data_dir, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Model model = load_model(model_file);
  if (model.problem != problem)
    throw DataError("model file " + model_file + " is for problem " +
                    to_string(model.problem) + ", not " + to_string(problem));
  if (problem == Problem::kBurgers) return evaluate_burgers(model, data_dir, out_dir);
  return evaluate_lorenz(model, data_dir, out_dir);
}

namespace {

std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return trim(line.substr(colon + 1));
    }
  }
  return "unknown-cpu";
}

// Median/percentile latency of repeated calls to f, in microseconds.
template <class F>
BenchEntry time_callable(const std::string& tag, const F& f) {
  constexpr int kWarmup = 200;
  constexpr int kReps = 2000;
  double sink = 0.0;
  for (int i = 0; i < kWarmup; ++i) sink += f();

  std::vector<double> us(kReps);
  const auto t_all0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kReps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    sink += f();
    const auto t1 = std::chrono::steady_clock::now();
    us[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  const auto t_all1 = std::chrono::steady_clock::now();
  if (sink == 0.123456789) std::cout << "";  // keep the calls alive

  std::sort(us.begin(), us.end());
  BenchEntry e;
  e.tag = tag;
  e.median_us = us[kReps / 2];
  e.p10_us = us[kReps / 10];
  e.p90_us = us[(9 * kReps) / 10];
  e.throughput_per_s =
      kReps / std::chrono::duration<double>(t_all1 - t_all0).count();
  return e;
}

}  // namespace

BenchReport cmd_bench(const std::vector<std::string>& model_files, const std::string& out_dir) {
  ensure_dir(out_dir);
  BenchReport report;
  report.hardware = cpu_model_name() + " (single thread)";

  Problem problem = Problem::kBurgers;
  for (const std::string& file : model_files) {
    const Model model = load_model(file);
    problem = model.problem;
    const std::string tag = std::string(to_string(model.problem)) + "_" + to_string(model.kind);

    if (model.problem == Problem::kBurgers) {
      const double t = 0.37, x = 0.21, nu = 0.003;
      if (model.is_hyper()) {
        const std::vector<double> theta_m =
            generate_main(model.as_hyper(), {{burgers::embed_nu(nu)}}).values;
        report.entries.push_back(time_callable(tag + "_main", [&] {
          return burgers::predict_main(model.main_spec, theta_m, t, x);
        }));
        report.entries.push_back(time_callable(tag + "_generate", [&] {
          return generate_main(model.as_hyper(), {{burgers::embed_nu(nu)}}).values[0];
        }));
      } else {
        report.entries.push_back(
            time_callable(tag, [&] { return burgers::predict(model, t, x, nu); }));
      }
    } else {
      const lorenz::LorenzParams p{10.0, 5.0 / 3.0, 21.7};
      const lorenz::State s{1.0, -2.0, 20.0};
      if (model.is_hyper()) {
        const auto ep = lorenz::embed_params(p);
        const std::vector<double> theta_m =
            generate_main(model.as_hyper(), {{ep[0], ep[1], ep[2]}}).values;
        report.entries.push_back(time_callable(tag + "_main", [&] {
          return lorenz::main_net_deriv(model.main_spec, theta_m, s)[0];
        }));
        report.entries.push_back(time_callable(tag + "_generate", [&] {
          return generate_main(model.as_hyper(), {{ep[0], ep[1], ep[2]}}).values[0];
        }));
      } else {
        report.entries.push_back(
            time_callable(tag, [&] { return lorenz::model_deriv(model, s, p)[0]; }));
      }
    }
  }

  const std::string path = out_dir + "/bench_" + to_string(problem) + ".csv";
  CsvWriter csv(path, {"model", "median_us", "p10_us", "p90_us", "throughput_per_s",
                       "hardware"});
  for (const BenchEntry& e : report.entries) {
    csv.row({e.tag, CsvWriter::num(e.median_us), CsvWriter::num(e.p10_us),
             CsvWriter::num(e.p90_us), CsvWriter::num(e.throughput_per_s),
             "\"" + report.hardware + "\""});
    std::cout << e.tag << ": median " << e.median_us << " us  (p10 " << e.p10_us << ", p90 "
              << e.p90_us << ", " << e.throughput_per_s << "/s)\n";
  }
  std::cout << "wrote " << path << "\n";
  return report;
}

}  // namespace hpnn
