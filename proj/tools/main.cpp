// Experiment harness: dataset generation, training, evaluation and
// latency benchmarking for the parameterized Burgers / Lorenz models.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "hpnn/errors.hpp"
#include "hpnn/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int run(int argc, char** argv) {
  CLI::App app{"hypernetwork-generated physics-informed networks"};
  app.require_subcommand(1);

  std::string problem_str = "burgers";
  std::uint64_t seed = 42;
  std::string out_dir = "data";
  bool force = false;
  auto* gen = app.add_subcommand("generate", "write datasets and reference solutions");
  gen->add_option("--problem", problem_str, "burgers or lorenz")->required();
  gen->add_option("--seed", seed, "RNG seed (default 42)");
  gen->add_option("--out", out_dir, "output directory (default data)");
  gen->add_flag("--force", force, "overwrite existing files");

  std::string config_path;
  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", config_path, "flat key=value config file")->required();

  std::string model_file, eval_problem, data_dir = "data", eval_out = ".";
  auto* eval = app.add_subcommand("evaluate", "held-out metrics and plot data");
  eval->add_option("--model", model_file, "trained .hpnn model file")->required();
  eval->add_option("--problem", eval_problem, "burgers or lorenz")->required();
  eval->add_option("--data", data_dir, "data directory (default data)");
  eval->add_option("--out", eval_out, "report directory (default .)");

  std::vector<std::string> bench_models;
  std::string bench_out = ".";
  auto* bench = app.add_subcommand("bench", "single-prediction latency");
  bench->add_option("--models", bench_models, "trained .hpnn model files")->required();
  bench->add_option("--out", bench_out, "report directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (gen->parsed()) {
    hpnn::cmd_generate(hpnn::problem_from_string(problem_str), seed, out_dir, force);
  } else if (train->parsed()) {
    hpnn::cmd_train(hpnn::load_config(config_path));
  } else if (eval->parsed()) {
    hpnn::cmd_evaluate(model_file, hpnn::problem_from_string(eval_problem), data_dir, eval_out);
  } else if (bench->parsed()) {
    hpnn::cmd_bench(bench_models, bench_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hpnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hpnn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const hpnn::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
