#include "sbmsir/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

GaussLaguerre compute(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one quadrature node");
  GaussLaguerre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double dn = n;
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    // Initial guesses for the i-th root (Stroud & Secrest style).
    if (i == 0) {
      z = 3.0 / (1.0 + 2.4 * dn);
    } else if (i == 1) {
      z += 15.0 / (1.0 + 2.5 * dn);
    } else {
      const double ai = i - 1;
      z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - rule.nodes[i - 2]);
    }
    double p1 = 0.0, p2 = 0.0, pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
      }
      pp = (dn * p1 - dn * p2) / z;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 3e-14 * std::max(1.0, z)) {
        converged = true;
        break;
      }
    }
    if (!converged || !std::isfinite(z))
      throw Error(ErrorCode::QuadratureUnstable, "Laguerre root " + std::to_string(i) + " did not converge");
    // Recompute p2 = L_{n-1}(z) and pp = L_n'(z) at the converged root.
    p1 = 1.0;
    p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
    }
    pp = (dn * p1 - dn * p2) / z;
    rule.nodes[i] = z;
    rule.weights[i] = -1.0 / (pp * dn * p2);
    if (!(rule.weights[i] > 0.0) || !std::isfinite(rule.weights[i]))
      throw Error(ErrorCode::QuadratureUnstable,
                  "weight " + std::to_string(i) + " of the " + std::to_string(n) +
                      "-node rule underflowed");
  }
  return rule;
}

}  // namespace

const GaussLaguerre& gauss_laguerre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLaguerre> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace sbmsir
