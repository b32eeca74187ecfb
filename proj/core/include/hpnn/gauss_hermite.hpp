#pragma once

#include <vector>

namespace hpnn {

// Nodes and weights for n-point Gauss-Hermite quadrature:
//   integral_{-inf}^{inf} e^{-z^2} f(z) dz  ~=  sum_i w[i] f(z[i])
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermite gauss_hermite(int n);

}  // namespace hpnn
