#pragma once

#include <vector>

namespace sbmsir {

// Nodes and weights with sum_i w_i f(x_i) ~ integral_0^inf e^{-x} f(x) dx.
struct GaussLaguerre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kDefaultQuadratureNodes = 64;

// Throws QuadratureUnstable when a weight underflows or Newton fails.
const GaussLaguerre& gauss_laguerre(int n);

}  // namespace sbmsir
