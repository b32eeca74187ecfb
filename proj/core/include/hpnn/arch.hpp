#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hpnn {

enum class Activation : std::uint8_t { kTanh = 0, kIdentity = 1 };

// Fully-connected architecture. Hidden layers share one activation
// (tanh everywhere in the experiments); the output layer is linear.
struct ArchSpec {
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  int output_dim = 0;
  Activation hidden_activation = Activation::kTanh;

  int num_layers() const { return static_cast<int>(hidden_sizes.size()) + 1; }
  bool operator==(const ArchSpec&) const = default;
};

// Number of trainable parameters: sum over layers of fan_in*fan_out + fan_out.
std::size_t param_count(const ArchSpec& spec);

// Byte-stable flat layout: layers in order, per layer first the weight
// matrix row-major (out x in), then the bias vector. This layout is frozen;
// serialization and the hypernetwork's output head both rely on it.
struct LayerView {
  std::size_t w_offset;  // fan_in*fan_out weights
  std::size_t b_offset;  // fan_out biases
  int fan_in;
  int fan_out;
  bool tanh_act;
};
std::vector<LayerView> layer_views(const ArchSpec& spec);

// Flat parameter array plus the architecture it parameterizes.
struct ParamVector {
  std::vector<double> values;
  ArchSpec spec;
};

std::string describe(const ArchSpec& spec);

}  // namespace hpnn
