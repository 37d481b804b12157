#pragma once

#include <cstdint>

#include "sbmsir/epidemic.hpp"
#include "sbmsir/model.hpp"

namespace sbmsir {

struct TreeSummary {
  Counts nodes;              // per label
  std::int64_t total = 0;
  bool survived = false;     // reached max_nodes
};

inline constexpr std::int64_t kDefaultMaxTreeNodes = 10'000;

// Forward infection tree from one root: each node lives T ~ Exp(gamma) and
// has Pois((1 - e^{-eta T}) W_kl s0_l) children of type l.
TreeSummary simulate_bp_tree(const MeanFieldParams& p, const Vector& s0, std::size_t root_label,
                             std::int64_t max_nodes, std::uint64_t seed);

}  // namespace sbmsir
