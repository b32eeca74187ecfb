#include "hpnn/mlp.hpp"

#include <cmath>

#include "hpnn/errors.hpp"

namespace hpnn {

Tape::Id mlp_on_tape(Tape& tape, const ArchSpec& spec, Tape::Id theta, Tape::Id input) {
  Tape::Id cur = input;
  for (const LayerView& lv : layer_views(spec)) {
    cur = tape.affine(cur, lv.fan_in, theta + static_cast<Tape::Id>(lv.w_offset),
                      theta + static_cast<Tape::Id>(lv.b_offset), lv.fan_out, lv.tanh_act);
  }
  return cur;
}

namespace {

void glorot_fill(std::vector<double>& values, const ArchSpec& spec, Rng& rng) {
  for (const LayerView& lv : layer_views(spec)) {
    const double bound = std::sqrt(6.0 / (lv.fan_in + lv.fan_out));
    for (std::size_t k = 0; k < static_cast<std::size_t>(lv.fan_in) * lv.fan_out; ++k)
      values[lv.w_offset + k] = rng.uniform(-bound, bound);
    for (int i = 0; i < lv.fan_out; ++i) values[lv.b_offset + i] = 0.0;
  }
}

}  // namespace

ParamVector init_params(const ArchSpec& spec, std::uint64_t seed, InitMode mode,
                        const ArchSpec* generated) {
  ParamVector pv;
  pv.spec = spec;
  pv.values.assign(param_count(spec), 0.0);
  Rng rng(seed);
  glorot_fill(pv.values, spec, rng);

  if (mode == InitMode::kHyperOutputScaled) {
    if (generated == nullptr)
      throw ConfigError("init_params: kHyperOutputScaled needs the generated net's spec");
    if (param_count(*generated) != static_cast<std::size_t>(spec.output_dim))
      throw ConfigError("init_params: hypernet output_dim != generated param count");
    const LayerView head = layer_views(spec).back();
    for (std::size_t k = 0; k < static_cast<std::size_t>(head.fan_in) * head.fan_out; ++k)
      pv.values[head.w_offset + k] *= 0.1;
    // Head biases become a standard init of the generated network, laid
    // out flat; the generated net at any lambda is then that init plus a
    // small data-dependent perturbation.
    std::vector<double> main_init(param_count(*generated), 0.0);
    Rng sub = rng.child(0x6d61696e);
    glorot_fill(main_init, *generated, sub);
    for (std::size_t i = 0; i < main_init.size(); ++i)
      pv.values[head.b_offset + i] = main_init[i];
  }
  return pv;
}

}  // namespace hpnn
