#pragma once

#include <string>
#include <vector>

#include "hpnn/burgers.hpp"
#include "hpnn/lorenz.hpp"
#include "hpnn/model.hpp"
#include "hpnn/optimizer.hpp"

namespace hpnn {

// Parsed experiment configuration (flat key = value text file).
struct ExperimentConfig {
  Problem problem = Problem::kBurgers;
  ModelKind model = ModelKind::kHyper;
  TrainingConfig training;
  std::string data_dir = "data";
  std::string out_dir = ".";

  void validate() const;
};

// Reads and validates a config file; unknown keys and malformed values
// are configuration errors naming the key. `problem` and `model` are
// required; training keys default per problem.
ExperimentConfig load_config(const std::string& path);
TrainingConfig default_training(Problem p);

// Data/report file locations (fixed names inside the chosen directories).
std::string burgers_dataset_path(const std::string& data_dir);
std::string burgers_reference_path(const std::string& data_dir, double nu);
std::string lorenz_train_path(const std::string& data_dir);
std::string lorenz_test_path(const std::string& data_dir);
std::string model_file_path(const std::string& out_dir, Problem p, ModelKind k);

// generate: writes datasets (and, for Burgers, cached reference
// solutions). Refuses to overwrite existing files unless force is set;
// byte-identical output for identical seeds.
void cmd_generate(Problem problem, std::uint64_t seed, const std::string& out_dir, bool force);

struct TrainOutcome {
  Model model;
  TrainResult result;
  std::string model_file;
  std::string history_file;
};

// train: trains the configured model on generated data, writes the .hpnn
// model and the loss-history CSV.
TrainOutcome cmd_train(const ExperimentConfig& cfg);

struct EvaluateOutcome {
  double primary_metric = 0.0;  // burgers: overall MSE; lorenz: aggregate rollout error
  std::string report_file;
  std::string plot_file;
};

// evaluate: held-out metrics plus plot data (Burgers: nu = 0.003 panel;
// Lorenz: the sigma=10, beta=5/3, rho=21.7 trajectory).
EvaluateOutcome cmd_evaluate(const std::string& model_file, Problem problem,
                             const std::string& data_dir, const std::string& out_dir);

struct BenchEntry {
  std::string tag;
  double median_us = 0.0;
  double p10_us = 0.0;
  double p90_us = 0.0;
  double throughput_per_s = 0.0;
};

struct BenchReport {
  std::vector<BenchEntry> entries;
  std::string hardware;
};

// bench: single-prediction latency per model (hypernetwork generation
// timed separately from main-network prediction), >=100 warmup and
// >=1000 timed repetitions, single-threaded.
BenchReport cmd_bench(const std::vector<std::string>& model_files, const std::string& out_dir);

// Training-loss closures (exposed for tests).
LossClosure make_burgers_closure(const Model& model, const burgers::BurgersDataset& ds,
                                 const TrainingConfig& cfg);
LossClosure make_lorenz_closure(const Model& model,
                                const std::vector<lorenz::Trajectory>& train,
                                const TrainingConfig& cfg);

}  // namespace hpnn
