#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hpnn/arch.hpp"
#include "hpnn/errors.hpp"
#include "hpnn/rng.hpp"
#include "hpnn/tape.hpp"

namespace hpnn {

struct TrainingConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  long iterations = 20000;
  long batch_data = 100;
  long batch_collocation = 1024;
  double alpha = 1.0;          // physics-loss weight
  std::uint64_t seed = 42;
  double lr_decay = 0.99;      // multiplicative, applied per 1000 iterations

  void validate() const;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place. Throws NumericError on a
// non-finite gradient component, reporting the step and loss.
void adam_step(std::vector<double>& theta, const GradResult& grad, OptimizerState& state,
               const TrainingConfig& cfg);

struct HistoryRow {
  long iteration;
  double total_loss;
  double data_loss;
  double physics_loss;
};

struct TrainResult {
  ParamVector params;  // best-loss parameters seen during the run
  double best_loss = 0.0;
  long best_iteration = 0;
  std::vector<HistoryRow> history;
};

// The loss closure evaluates loss and gradient at theta for a batch it
// draws itself from the provided per-iteration RNG stream.
using LossClosure = std::function<GradResult(std::span<const double> theta, Rng& rng)>;

// Thrown when the loss or gradient goes non-finite; carries the history
// recorded up to the abort so callers can persist it.
struct TrainingAborted : NumericError {
  std::vector<HistoryRow> history;
  TrainingAborted(const std::string& msg, std::vector<HistoryRow> h)
      : NumericError(msg), history(std::move(h)) {}
};

// Seeded Adam loop: cfg.iterations steps, loss recorded every 100
// iterations (and at the last), best-loss parameters returned. Aborts
// with NumericError when the loss goes non-finite, carrying the history
// written so far in the exception message.
TrainResult train(const LossClosure& loss, const ParamVector& theta0,
                  const TrainingConfig& cfg);

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

}  // namespace hpnn
