#include "hpnn/arch.hpp"

#include <sstream>

#include "hpnn/errors.hpp"

namespace hpnn {

std::size_t param_count(const ArchSpec& spec) {
  std::size_t n = 0;
  int fan_in = spec.input_dim;
  for (int h : spec.hidden_sizes) {
    n += static_cast<std::size_t>(fan_in) * h + h;
    fan_in = h;
  }
  n += static_cast<std::size_t>(fan_in) * spec.output_dim + spec.output_dim;
  return n;
}

std::vector<LayerView> layer_views(const ArchSpec& spec) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0)
    throw ConfigError("ArchSpec: input_dim and output_dim must be positive");
  std::vector<LayerView> views;
  std::size_t off = 0;
  int fan_in = spec.input_dim;
  const bool tanh_hidden = spec.hidden_activation == Activation::kTanh;
  for (int h : spec.hidden_sizes) {
    if (h <= 0) throw ConfigError("ArchSpec: hidden sizes must be positive");
    views.push_back({off, off + static_cast<std::size_t>(fan_in) * h, fan_in, h, tanh_hidden});
    off += static_cast<std::size_t>(fan_in) * h + h;
    fan_in = h;
  }
  views.push_back({off, off + static_cast<std::size_t>(fan_in) * spec.output_dim, fan_in,
                   spec.output_dim, false});
  return views;
}

std::string describe(const ArchSpec& spec) {
  std::ostringstream os;
  os << spec.input_dim << " -> ";
  for (int h : spec.hidden_sizes) os << h << " -> ";
  os << spec.output_dim << " (" << param_count(spec) << " parameters)";
  return os.str();
}

}  // namespace hpnn
