#include "sbmsir/branching.hpp"

#include <cmath>
#include <random>

#include "sbmsir/error.hpp"
#include "sbmsir/rng.hpp"

namespace sbmsir {

TreeSummary simulate_bp_tree(const MeanFieldParams& p, const Vector& s0, std::size_t root_label,
                             std::int64_t max_nodes, std::uint64_t seed) {
  validate(p);
  const std::size_t K = p.K();
  if (s0.size() != K) throw Error(ErrorCode::InvalidArgument, "s0 must have length K");
  if (root_label >= K) throw Error(ErrorCode::InvalidArgument, "root label out of range");
  if (max_nodes < 1) throw Error(ErrorCode::InvalidArgument, "max_nodes must be at least 1");

  Rng rng = make_rng(seed);
  TreeSummary tree;
  tree.nodes.assign(K, 0);
  tree.nodes[root_label] = 1;
  tree.total = 1;
  if (tree.total >= max_nodes) {
    tree.survived = true;
    return tree;
  }
  // Unprocessed nodes per type; the total size does not depend on the order.
  Counts pending(K, 0);
  pending[root_label] = 1;
  std::size_t k = root_label;
  for (;;) {
    while (k < K && pending[k] == 0) ++k;
    if (k == K) {
      k = 0;
      while (k < K && pending[k] == 0) ++k;
      if (k == K) return tree;
    }
    --pending[k];
    const double T = exponential(rng, p.gamma);
    const double transmit = -std::expm1(-p.eta * T);
    for (std::size_t l = 0; l < K; ++l) {
      const double mean = transmit * p.W(k, l) * s0[l];
      if (mean <= 0.0) continue;
      const auto children = std::poisson_distribution<std::int64_t>(mean)(rng);
      tree.nodes[l] += children;
      tree.total += children;
      pending[l] += children;
      if (tree.total >= max_nodes) {
        tree.survived = true;
        return tree;
      }
    }
  }
}

}  // namespace sbmsir
