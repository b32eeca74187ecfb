#pragma once

#include <span>
#include <vector>

#include "hpnn/arch.hpp"
#include "hpnn/hyperdual.hpp"
#include "hpnn/rng.hpp"
#include "hpnn/tape.hpp"

namespace hpnn {

// Forward pass generic over the scalar type (double or HyperDual);
// parameters stay plain doubles. Hidden layers apply the spec's
// activation, the output layer is linear.
template <class T>
std::vector<T> mlp_forward(const ArchSpec& spec, std::span<const double> theta,
                           std::span<const T> input) {
  using std::tanh;  // exact double overload beats HyperDual's via conversion
  std::vector<T> cur(input.begin(), input.end());
  std::vector<T> next;
  for (const LayerView& lv : layer_views(spec)) {
    next.assign(static_cast<std::size_t>(lv.fan_out), T{});
    const double* w = theta.data() + lv.w_offset;
    const double* b = theta.data() + lv.b_offset;
    for (int i = 0; i < lv.fan_out; ++i) {
      T z = T{} + b[i];
      const double* wrow = w + static_cast<std::size_t>(i) * lv.fan_in;
      for (int j = 0; j < lv.fan_in; ++j) z += cur[j] * wrow[j];
      next[i] = lv.tanh_act ? tanh(z) : z;
    }
    cur.swap(next);
  }
  return cur;
}

inline std::vector<double> mlp_forward(const ParamVector& pv, std::span<const double> input) {
  return mlp_forward<double>(pv.spec, pv.values, input);
}

// Forward pass recorded on a tape. theta and input are contiguous node
// ranges; theta may be a leaf block (baseline training) or the output
// range of another network (hypernetwork-generated parameters). Returns
// the first of output_dim contiguous output node ids.
Tape::Id mlp_on_tape(Tape& tape, const ArchSpec& spec, Tape::Id theta, Tape::Id input);

enum class InitMode : std::uint8_t {
  kStandard = 0,          // Glorot-uniform weights, zero biases
  kHyperOutputScaled = 1  // hypernetwork init, see init_params
};

// Glorot-uniform initialization. In kHyperOutputScaled mode (for
// hypernetworks generating a main network) the final layer's weights are
// scaled by 0.1 and its biases are set to a Glorot draw shaped like
// `generated` (the main net's own layout), so generated networks start
// near an ordinarily initialized MLP instead of near zero scale.
ParamVector init_params(const ArchSpec& spec, std::uint64_t seed,
                        InitMode mode = InitMode::kStandard,
                        const ArchSpec* generated = nullptr);

}  // namespace hpnn
