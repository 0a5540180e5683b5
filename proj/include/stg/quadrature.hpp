#pragma once

#include <vector>

namespace stg {

// Gauss-Legendre rule mapped to [0,1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Supported orders: 2, 3, 4, 5, 6, 8, 10, 12, 16, 20.
const QuadratureRule& gauss_legendre(int n);

}  // namespace stg
