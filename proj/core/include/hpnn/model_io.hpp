#pragma once

#include <string>

#include "hpnn/model.hpp"

namespace hpnn {

// .hpnn model files: versioned binary descriptor (problem, kind,
// architectures) followed by the flat little-endian double array in the
// frozen layer-major layout. Round-trips are bitwise.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hpnn
