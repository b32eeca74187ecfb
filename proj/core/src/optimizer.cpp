#include "hpnn/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "hpnn/errors.hpp"
#include "hpnn/io_util.hpp"

namespace hpnn {

void TrainingConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0) throw ConfigError("adam_beta1 must be in (0,1)");
  if (adam_beta2 <= 0.0 || adam_beta2 >= 1.0) throw ConfigError("adam_beta2 must be in (0,1)");
  if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (batch_data < 1) throw ConfigError("batch_data must be >= 1");
  if (batch_collocation < 1) throw ConfigError("batch_collocation must be >= 1");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (lr_decay <= 0.0 || lr_decay > 1.0) throw ConfigError("lr_decay must be in (0,1]");
}

void adam_step(std::vector<double>& theta, const GradResult& grad, OptimizerState& state,
               const TrainingConfig& cfg) {
  if (grad.gradient.size() != theta.size() || state.m.size() != theta.size())
    throw ConfigError("adam_step: parameter/gradient/state size mismatch");

  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(grad.gradient[i])) {
      std::ostringstream os;
      os << "non-finite gradient component " << i << " at step " << state.step + 1
         << " (loss " << grad.loss_value << ")";
      throw NumericError(os.str());
    }
  }

  state.step += 1;
  const double lr =
      cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>((state.step - 1) / 1000));
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad.gradient[i];
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * g;
    state.v[i] = cfg.adam_beta2 * state.v[i] + (1.0 - cfg.adam_beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  }
}

TrainResult train(const LossClosure& loss, const ParamVector& theta0,
                  const TrainingConfig& cfg) {
  cfg.validate();

  TrainResult result;
  result.params = theta0;
  std::vector<double>& theta = result.params.values;
  std::vector<double> best = theta;
  double best_loss = 0.0;
  long best_iter = 0;
  bool have_best = false;

  OptimizerState state(theta.size());
  Rng batch_rng(cfg.seed ^ 0xb4c0ffeeULL);

  for (long it = 0; it < cfg.iterations; ++it) {
    const GradResult g = loss(theta, batch_rng);
    if (!std::isfinite(g.loss_value)) {
      std::ostringstream os;
      os << "loss became non-finite at iteration " << it;
      throw TrainingAborted(os.str(), std::move(result.history));
    }
    if (!have_best || g.loss_value < best_loss) {
      best = theta;
      best_loss = g.loss_value;
      best_iter = it;
      have_best = true;
    }
    if (it % 100 == 0 || it == cfg.iterations - 1)
      result.history.push_back({it, g.loss_value, g.data_loss, g.physics_loss});
    try {
      adam_step(theta, g, state, cfg);
    } catch (const NumericError& e) {
      throw TrainingAborted(e.what(), std::move(result.history));
    }
  }

  theta = best;
  result.best_loss = best_loss;
  result.best_iteration = best_iter;
  return result;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
  CsvWriter csv(path, {"iteration", "total_loss", "data_loss", "physics_loss"});
  for (const HistoryRow& r : history)
    csv.row({std::to_string(r.iteration), CsvWriter::num(r.total_loss),
             CsvWriter::num(r.data_loss), CsvWriter::num(r.physics_loss)});
}

}  // namespace hpnn
