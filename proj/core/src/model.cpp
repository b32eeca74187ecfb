#include "hpnn/model.hpp"

#include "hpnn/errors.hpp"

namespace hpnn {

ParamVector generate_main(const HyperModel& model, const Parameterization& lambda) {
  if (static_cast<int>(lambda.lambda.size()) != model.hyper_spec.input_dim)
    throw ConfigError("generate_main: parameterization dimension != hypernet input_dim");
  if (param_count(model.main_spec) != static_cast<std::size_t>(model.hyper_spec.output_dim))
    throw ConfigError("generate_main: hypernet output_dim != main net parameter count");
  ParamVector out;
  out.spec = model.main_spec;
  out.values = mlp_forward<double>(model.hyper_spec, model.theta_h.values, lambda.lambda);
  return out;
}

const char* to_string(Problem p) {
  return p == Problem::kBurgers ? "burgers" : "lorenz";
}
const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kHyper: return "hyperpinn";
    case ModelKind::kSmallBaseline: return "small_baseline";
    default: return "large_baseline";
  }
}
Problem problem_from_string(const std::string& s) {
  if (s == "burgers") return Problem::kBurgers;
  if (s == "lorenz") return Problem::kLorenz;
  throw ConfigError("unknown problem '" + s + "' (expected burgers or lorenz)");
}
ModelKind model_kind_from_string(const std::string& s) {
  if (s == "hyperpinn") return ModelKind::kHyper;
  if (s == "small_baseline") return ModelKind::kSmallBaseline;
  if (s == "large_baseline") return ModelKind::kLargeBaseline;
  throw ConfigError("unknown model '" + s +
                    "' (expected hyperpinn, small_baseline or large_baseline)");
}

// Layer sizes as reported in the experiments. The baselines take the
// parameterization as extra inputs; the hypernetwork takes only the
// parameterization and emits the main net's flat parameter vector.
ArchSpec main_arch(Problem p, ModelKind k) {
  if (p == Problem::kBurgers) {
    switch (k) {
      case ModelKind::kHyper: return {2, {8, 8, 8, 8, 8, 8}, 1};           // 393 params
      case ModelKind::kSmallBaseline: return {3, {8, 8, 8, 8, 8, 8}, 1};   // 401 params
      case ModelKind::kLargeBaseline:
        return {3, {32, 32, 32, 32, 32, 32, 32, 32, 32, 32}, 1};           // 9665 params
    }
  }
  switch (k) {
    case ModelKind::kHyper: return {3, {16}, 3};          // 115 params
    case ModelKind::kSmallBaseline: return {6, {16}, 3};  // 163 params (see README)
    case ModelKind::kLargeBaseline: return {6, {256}, 3};
  }
  throw ConfigError("unreachable model kind");
}

ArchSpec hyper_arch(Problem p) {
  const ArchSpec main = main_arch(p, ModelKind::kHyper);
  const int out = static_cast<int>(param_count(main));
  if (p == Problem::kBurgers) return {1, {32, 32, 32, 16}, out};  // 9385 params
  return {3, {16, 8}, out};
}

Model make_model(Problem p, ModelKind k, std::uint64_t seed) {
  Model m;
  m.problem = p;
  m.kind = k;
  m.main_spec = main_arch(p, k);
  if (k == ModelKind::kHyper) {
    m.hyper_spec = hyper_arch(p);
    m.params = init_params(m.hyper_spec, seed, InitMode::kHyperOutputScaled, &m.main_spec);
  } else {
    m.params = init_params(m.main_spec, seed);
  }
  return m;
}

}  // namespace hpnn
