#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "hpnn/errors.hpp"
#include "hpnn/experiment.hpp"
#include "hpnn/io_util.hpp"
#include "hpnn/model_io.hpp"

namespace fs = std::filesystem;
using hpnn::ExperimentConfig;
using hpnn::ModelKind;
using hpnn::Problem;

namespace {

std::string write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYPERPINN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("config files parse with defaults and validation") {
  TempDir dir("hpnn_cfg_test");
  const std::string good = write_file(dir.str() + "/good.cfg",
                                      "# comment\n"
                                      "problem = burgers\n"
                                      "model = hyperpinn\n"
                                      "iterations = 500\n"
                                      "alpha = 0.5\n"
                                      "seed = 7\n");
  const ExperimentConfig cfg = hpnn::load_config(good);
  CHECK(cfg.problem == Problem::kBurgers);
  CHECK(cfg.model == ModelKind::kHyper);
  CHECK(cfg.training.iterations == 500);
  CHECK(cfg.training.alpha == 0.5);
  CHECK(cfg.training.seed == 7);
  CHECK(cfg.training.batch_collocation == 1024);  // problem default

  SUBCASE("unknown keys name the key") {
    const std::string bad = write_file(dir.str() + "/bad1.cfg",
                                       "problem = burgers\nmodel = hyperpinn\nlearningrate = 1\n");
    CHECK_THROWS_WITH_AS(hpnn::load_config(bad), doctest::Contains("learningrate"),
                         hpnn::ConfigError);
  }
  SUBCASE("malformed values name the key") {
    const std::string bad = write_file(dir.str() + "/bad2.cfg",
                                       "problem = burgers\nmodel = hyperpinn\niterations = abc\n");
    CHECK_THROWS_WITH_AS(hpnn::load_config(bad), doctest::Contains("iterations"),
                         hpnn::ConfigError);
  }
  SUBCASE("missing problem/model are config errors") {
    const std::string bad = write_file(dir.str() + "/bad3.cfg", "model = hyperpinn\n");
    CHECK_THROWS_AS(hpnn::load_config(bad), hpnn::ConfigError);
  }
  SUBCASE("invalid model names are config errors") {
    const std::string bad =
        write_file(dir.str() + "/bad4.cfg", "problem = burgers\nmodel = gigantic\n");
    CHECK_THROWS_AS(hpnn::load_config(bad), hpnn::ConfigError);
  }
  SUBCASE("invariant violations are config errors before compute") {
    const std::string bad = write_file(
        dir.str() + "/bad5.cfg", "problem = burgers\nmodel = hyperpinn\niterations = 0\n");
    CHECK_THROWS_AS(hpnn::load_config(bad), hpnn::ConfigError);
  }
}

TEST_CASE("training without generated data names the generate command") {
  TempDir dir("hpnn_nodata_test");
  ExperimentConfig cfg;
  cfg.problem = Problem::kBurgers;
  cfg.model = ModelKind::kSmallBaseline;
  cfg.training = hpnn::default_training(cfg.problem);
  cfg.training.iterations = 5;
  cfg.data_dir = dir.str() + "/empty";
  cfg.out_dir = dir.str();
  CHECK_THROWS_WITH_AS(hpnn::cmd_train(cfg), doctest::Contains("generate"), hpnn::DataError);
}

TEST_CASE("burgers end-to-end at tiny scale: generate, train, evaluate, bench") {
  TempDir dir("hpnn_e2e_burgers");
  const std::string data = dir.str() + "/data";
  hpnn::cmd_generate(Problem::kBurgers, 42, data, false);
  CHECK(hpnn::file_exists(hpnn::burgers_dataset_path(data)));
  for (double nu : hpnn::burgers::test_nus())
    CHECK(hpnn::file_exists(hpnn::burgers_reference_path(data, nu)));

  // re-generation without --force refuses; with force succeeds
  CHECK_THROWS_AS(hpnn::cmd_generate(Problem::kBurgers, 42, data, false), hpnn::DataError);

  ExperimentConfig cfg;
  cfg.problem = Problem::kBurgers;
  cfg.model = ModelKind::kHyper;
  cfg.training = hpnn::default_training(cfg.problem);
  cfg.training.iterations = 30;
  cfg.training.batch_collocation = 64;
  cfg.data_dir = data;
  cfg.out_dir = dir.str() + "/run";
  const auto outcome = hpnn::cmd_train(cfg);
  CHECK(hpnn::file_exists(outcome.model_file));
  CHECK(hpnn::file_exists(outcome.history_file));
  CHECK(outcome.result.history.front().iteration == 0);

  // loads back and evaluates without warnings
  const auto eval = hpnn::cmd_evaluate(outcome.model_file, Problem::kBurgers, data,
                                       dir.str() + "/run");
  CHECK(hpnn::file_exists(eval.report_file));
  CHECK(hpnn::file_exists(eval.plot_file));
  CHECK(eval.primary_metric > 1e-2);  // 30 iterations cannot fit the family

  // problem mismatch is a load/data error
  CHECK_THROWS_AS(
      hpnn::cmd_evaluate(outcome.model_file, Problem::kLorenz, data, dir.str() + "/run"),
      hpnn::DataError);

  // determinism: retraining with the same seed reproduces the model file
  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = dir.str() + "/run2";
  const auto outcome2 = hpnn::cmd_train(cfg2);
  CHECK(slurp(outcome.model_file) == slurp(outcome2.model_file));
  CHECK(slurp(outcome.history_file) == slurp(outcome2.history_file));

  // bench produces a non-empty report with positive latencies
  const auto bench = hpnn::cmd_bench({outcome.model_file}, dir.str() + "/run");
  REQUIRE(bench.entries.size() == 2);  // main + generate for the hyper model
  for (const auto& e : bench.entries) {
    CHECK(e.median_us > 0.0);
    CHECK(e.p10_us <= e.median_us);
    CHECK(e.median_us <= e.p90_us);
    CHECK(e.throughput_per_s > 0.0);
  }
  CHECK(!bench.hardware.empty());
}

TEST_CASE("lorenz end-to-end at tiny scale") {
  TempDir dir("hpnn_e2e_lorenz");
  const std::string data = dir.str() + "/data";
  hpnn::cmd_generate(Problem::kLorenz, 42, data, false);
  const auto train_trajs = hpnn::lorenz::load_trajectories(hpnn::lorenz_train_path(data));
  const auto test_trajs = hpnn::lorenz::load_trajectories(hpnn::lorenz_test_path(data));
  REQUIRE(train_trajs.size() == 3000);
  REQUIRE(test_trajs.size() == 100);

  // dataset protocol: 30 parameter draws x 100 initial conditions
  int param_changes = 0;
  for (std::size_t i = 1; i < train_trajs.size(); ++i)
    if (train_trajs[i].params.rho != train_trajs[i - 1].params.rho) ++param_changes;
  CHECK(param_changes == 29);
  for (const auto& tr : train_trajs) {
    CHECK(tr.params.sigma == 10.0);
    for (double v : tr.x0) {
      CHECK(v >= -10.0);
      CHECK(v <= 10.0);
    }
    CHECK(tr.states.size() == 2501);
  }
  // test parameters disjoint from training parameters
  for (const auto& te : test_trajs)
    for (const auto& tr : train_trajs) {
      CHECK(te.params.rho != tr.params.rho);
      CHECK(te.params.beta != tr.params.beta);
    }

  ExperimentConfig cfg;
  cfg.problem = Problem::kLorenz;
  cfg.model = ModelKind::kSmallBaseline;
  cfg.training = hpnn::default_training(cfg.problem);
  cfg.training.iterations = 40;
  cfg.training.batch_data = 32;
  cfg.data_dir = data;
  cfg.out_dir = dir.str() + "/run";
  const auto outcome = hpnn::cmd_train(cfg);
  const auto eval =
      hpnn::cmd_evaluate(outcome.model_file, Problem::kLorenz, data, dir.str() + "/run");
  CHECK(hpnn::file_exists(eval.report_file));
  CHECK(hpnn::file_exists(eval.plot_file));
  CHECK(eval.primary_metric > 0.0);
}

TEST_CASE("cli exit codes: 0 help, 2 config, 3 data") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("train --config /nonexistent.cfg") == 2);
  CHECK(run_cli("generate --problem neither") == 2);

  TempDir dir("hpnn_cli_test");
  const std::string cfg = write_file(dir.str() + "/c.cfg",
                                     "problem = burgers\nmodel = hyperpinn\niterations = 5\n"
                                     "data_dir = " + dir.str() + "/missing\n"
                                     "out_dir = " + dir.str() + "\n");
  CHECK(run_cli("train --config " + cfg) == 3);
}
