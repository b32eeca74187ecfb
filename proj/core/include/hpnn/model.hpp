#pragma once

#include <span>
#include <string>
#include <vector>

#include "hpnn/arch.hpp"
#include "hpnn/mlp.hpp"

namespace hpnn {

// Problem parameterization: nu for the Burgers PDE (dim 1), (sigma, beta,
// rho) for the Lorenz ODE (dim 3).
struct Parameterization {
  std::vector<double> lambda;
};

// Hypernetwork + the architecture of the main network it generates.
// theta_h are the trainable parameters; a main parameter vector is one
// hypernetwork forward pass away.
struct HyperModel {
  ArchSpec hyper_spec;
  ArchSpec main_spec;
  ParamVector theta_h;
};

ParamVector generate_main(const HyperModel& model, const Parameterization& lambda);

enum class Problem : std::uint8_t { kBurgers = 0, kLorenz = 1 };
enum class ModelKind : std::uint8_t { kHyper = 0, kSmallBaseline = 1, kLargeBaseline = 2 };

const char* to_string(Problem p);
const char* to_string(ModelKind k);
Problem problem_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

// A trainable model for one problem: either a hypernetwork (params =
// theta_h, main_spec = generated net) or a single baseline network
// (params directly parameterize main_spec; the parameterization is part
// of the input).
struct Model {
  Problem problem = Problem::kBurgers;
  ModelKind kind = ModelKind::kHyper;
  ArchSpec main_spec;
  ArchSpec hyper_spec;  // meaningful for kHyper only
  ParamVector params;

  bool is_hyper() const { return kind == ModelKind::kHyper; }
  HyperModel as_hyper() const { return {hyper_spec, main_spec, params}; }
};

// Architectures used by the experiments, per problem and model kind.
ArchSpec main_arch(Problem p, ModelKind k);
ArchSpec hyper_arch(Problem p);
Model make_model(Problem p, ModelKind k, std::uint64_t seed);

}  // namespace hpnn
