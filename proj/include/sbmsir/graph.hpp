#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sbmsir/model.hpp"

namespace sbmsir {

using VertexId = std::uint32_t;

struct Edge {
  VertexId u;  // u <= v
  VertexId v;
  std::uint32_t multiplicity;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected labeled (multi)graph. Edges are stored once per unordered pair
// in canonical (u <= v) sorted order, which makes the multiplicity map
// symmetric by construction.
class LabeledGraph {
 public:
  LabeledGraph() = default;
  LabeledGraph(std::vector<std::uint32_t> labels, std::vector<Edge> edges, bool is_multigraph);

  std::size_t n() const noexcept { return labels_.size(); }
  std::size_t K() const noexcept { return K_; }
  std::uint32_t label(VertexId v) const { return labels_[v]; }
  const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool is_multigraph() const noexcept { return is_multigraph_; }

  std::uint32_t multiplicity(VertexId a, VertexId b) const;
  // Edge count with multiplicity; a self-loop contributes one.
  std::uint64_t total_multiplicity() const;
  std::vector<std::uint64_t> degrees() const;
  bool is_simple() const;

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;

 private:
  std::vector<std::uint32_t> labels_;
  std::vector<Edge> edges_;
  bool is_multigraph_ = false;
  std::size_t K_ = 0;
};

// Compressed adjacency, self-loops dropped (they never transmit).
struct Adjacency {
  struct Entry {
    VertexId neighbor;
    std::uint32_t multiplicity;
  };
  std::vector<std::size_t> offsets;
  std::vector<Entry> entries;

  explicit Adjacency(const LabeledGraph& g);
  std::span<const Entry> neighbors(VertexId v) const {
    return {entries.data() + offsets[v], entries.data() + offsets[v + 1]};
  }
};

// Vertex labels in contiguous blocks: the first n_1 vertices carry label 0 etc.
std::vector<std::uint32_t> block_labels(const ModelParams& params);

LabeledGraph sample_sbm(const ModelParams& params, std::uint64_t seed);
LabeledGraph sample_psbm(const ModelParams& params, std::uint64_t seed);
// PSBM with an explicit affinity (W itself is not consulted).
LabeledGraph sample_psbm_with_affinity(const ModelParams& params, const Matrix& affinity,
                                       std::uint64_t seed);

struct CouplingDraw {
  LabeledGraph graph;
  int attempts = 0;
};

inline constexpr int kDefaultMaxAttempts = 1000;

// Rejection sampler: draws PSBM(W') until simple. Throws MaxAttemptsExceeded.
CouplingDraw sample_sbm_via_coupling(const ModelParams& params, std::uint64_t seed,
                                     int max_attempts = kDefaultMaxAttempts);

// Edge-list text format:
//   # n=<n> K=<K> labels=<l_0,l_1,...>
//   u v multiplicity
// Vertex ids and labels are 0-based.
void write_edge_list(std::ostream& os, const LabeledGraph& g);
// Validates the invariants; when params is given, also checks label counts.
LabeledGraph read_edge_list(std::istream& is, const ModelParams* params = nullptr);

}  // namespace sbmsir
