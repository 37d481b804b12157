#include "sbmsir/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "sbmsir/error.hpp"
#include "sbmsir/rng.hpp"

namespace sbmsir {

namespace {

std::uint64_t pair_key(VertexId u, VertexId v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

Edge canonical(VertexId a, VertexId b, std::uint32_t m) {
  return a <= b ? Edge{a, b, m} : Edge{b, a, m};
}

void sort_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
}

// Block of vertex pairs. Either two distinct communities (all n_k * n_l
// pairs) or one community (unordered pairs u < v).
struct Block {
  VertexId first_a, size_a;
  VertexId first_b, size_b;
  bool diagonal;

  double pairs() const {
    const double a = size_a;
    return diagonal ? a * (a - 1.0) / 2.0 : a * static_cast<double>(size_b);
  }

  std::pair<VertexId, VertexId> draw(Rng& rng) const {
    if (!diagonal) {
      return {static_cast<VertexId>(first_a + uniform_index(rng, size_a)),
              static_cast<VertexId>(first_b + uniform_index(rng, size_b))};
    }
    for (;;) {
      const auto u = static_cast<VertexId>(first_a + uniform_index(rng, size_a));
      const auto v = static_cast<VertexId>(first_a + uniform_index(rng, size_a));
      if (u != v) return {u, v};
    }
  }

  template <class F>
  void for_each_pair(F&& f) const {
    for (VertexId i = 0; i < size_a; ++i) {
      const VertexId j0 = diagonal ? i + 1 : 0;
      const VertexId jn = diagonal ? size_a : size_b;
      for (VertexId j = j0; j < jn; ++j) f(first_a + i, (diagonal ? first_a : first_b) + j);
    }
  }
};

std::vector<Block> blocks(const ModelParams& p) {
  std::vector<VertexId> first(p.K, 0);
  for (std::size_t k = 1; k < p.K; ++k)
    first[k] = first[k - 1] + static_cast<VertexId>(p.community_sizes[k - 1]);
  std::vector<Block> out;
  for (std::size_t k = 0; k < p.K; ++k)
    for (std::size_t l = k; l < p.K; ++l)
      out.push_back({first[k], static_cast<VertexId>(p.community_sizes[k]), first[l],
                     static_cast<VertexId>(p.community_sizes[l]), k == l});
  return out;
}

void check_size(const ModelParams& p) {
  validate(p);
  if (p.n() >= static_cast<std::int64_t>(UINT32_MAX))
    throw Error(ErrorCode::InvalidArgument, "n too large for 32-bit vertex ids");
}

// Bernoulli(p) over every pair of the block, with p = w / n.
void sbm_block(const Block& b, double p, Rng& rng, std::vector<Edge>& out) {
  if (p <= 0.0) return;
  const double pairs = b.pairs();
  if (pairs <= 0.0) return;
  // Dense or tiny blocks: direct Bernoulli trials.
  if (p > 0.25 || pairs < 4096.0) {
    b.for_each_pair([&](VertexId u, VertexId v) {
      if (uniform01(rng) < p) out.push_back(canonical(u, v, 1));
    });
    return;
  }
  const auto total = static_cast<std::uint64_t>(pairs);
  const std::uint64_t m = std::binomial_distribution<std::uint64_t>(total, p)(rng);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  while (seen.size() < m) {
    auto [u, v] = b.draw(rng);
    const Edge e = canonical(u, v, 1);
    if (seen.insert(pair_key(e.u, e.v)).second) out.push_back(e);
  }
}

void psbm_block(const Block& b, double p, Rng& rng, std::vector<Edge>& out) {
  if (p <= 0.0) return;
  std::unordered_map<std::uint64_t, std::size_t> index;
  auto add = [&](VertexId u, VertexId v) {
    const Edge e = canonical(u, v, 1);
    auto [it, fresh] = index.try_emplace(pair_key(e.u, e.v), out.size());
    if (fresh) out.push_back(e);
    else ++out[it->second].multiplicity;
  };
  const double pairs = b.pairs();
  if (pairs > 0.0) {
    const std::uint64_t m = std::poisson_distribution<std::uint64_t>(pairs * p)(rng);
    index.reserve(m * 2);
    for (std::uint64_t i = 0; i < m; ++i) {
      auto [u, v] = b.draw(rng);
      add(u, v);
    }
  }
  if (b.diagonal) {
    const std::uint64_t loops =
        std::poisson_distribution<std::uint64_t>(static_cast<double>(b.size_a) * p)(rng);
    for (std::uint64_t i = 0; i < loops; ++i) {
      const auto v = static_cast<VertexId>(b.first_a + uniform_index(rng, b.size_a));
      add(v, v);
    }
  }
}

}  // namespace

LabeledGraph::LabeledGraph(std::vector<std::uint32_t> labels, std::vector<Edge> edges,
                           bool is_multigraph)
    : labels_(std::move(labels)), edges_(std::move(edges)), is_multigraph_(is_multigraph) {
  sort_edges(edges_);
  for (auto l : labels_) K_ = std::max<std::size_t>(K_, l + 1);
}

std::uint32_t LabeledGraph::multiplicity(VertexId a, VertexId b) const {
  const Edge key = canonical(a, b, 0);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& x, const Edge& y) {
    return x.u != y.u ? x.u < y.u : x.v < y.v;
  });
  return it != edges_.end() && it->u == key.u && it->v == key.v ? it->multiplicity : 0;
}

std::uint64_t LabeledGraph::total_multiplicity() const {
  std::uint64_t total = 0;
  for (const auto& e : edges_) total += e.multiplicity;
  return total;
}

std::vector<std::uint64_t> LabeledGraph::degrees() const {
  std::vector<std::uint64_t> d(n(), 0);
  for (const auto& e : edges_) {
    d[e.u] += e.multiplicity;
    if (e.u != e.v) d[e.v] += e.multiplicity;
  }
  return d;
}

bool LabeledGraph::is_simple() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.u != e.v && e.multiplicity == 1; });
}

Adjacency::Adjacency(const LabeledGraph& g) {
  offsets.assign(g.n() + 1, 0);
  for (const auto& e : g.edges()) {
    if (e.u == e.v) continue;
    ++offsets[e.u + 1];
    ++offsets[e.v + 1];
  }
  for (std::size_t v = 0; v < g.n(); ++v) offsets[v + 1] += offsets[v];
  entries.resize(offsets.back());
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& e : g.edges()) {
    if (e.u == e.v) continue;
    entries[fill[e.u]++] = {e.v, e.multiplicity};
    entries[fill[e.v]++] = {e.u, e.multiplicity};
  }
}

std::vector<std::uint32_t> block_labels(const ModelParams& p) {
  std::vector<std::uint32_t> labels;
  labels.reserve(static_cast<std::size_t>(p.n()));
  for (std::size_t k = 0; k < p.K; ++k)
    labels.insert(labels.end(), static_cast<std::size_t>(p.community_sizes[k]),
                  static_cast<std::uint32_t>(k));
  return labels;
}

LabeledGraph sample_sbm(const ModelParams& params, std::uint64_t seed) {
  check_size(params);
  Rng rng = make_rng(seed);
  const double n = static_cast<double>(params.n());
  std::vector<Edge> edges;
  std::size_t k = 0, l = 0;
  for (const auto& b : blocks(params)) {
    sbm_block(b, params.W(k, l) / n, rng, edges);
    if (++l == params.K) l = ++k;
  }
  return LabeledGraph(block_labels(params), std::move(edges), false);
}

LabeledGraph sample_psbm_with_affinity(const ModelParams& params, const Matrix& affinity,
                                       std::uint64_t seed) {
  check_size(params);
  if (affinity.rows() != params.K || affinity.cols() != params.K)
    throw Error(ErrorCode::InvalidArgument, "affinity must be K x K");
  Rng rng = make_rng(seed);
  const double n = static_cast<double>(params.n());
  std::vector<Edge> edges;
  std::size_t k = 0, l = 0;
  for (const auto& b : blocks(params)) {
    psbm_block(b, affinity(k, l) / n, rng, edges);
    if (++l == params.K) l = ++k;
  }
  return LabeledGraph(block_labels(params), std::move(edges), true);
}

LabeledGraph sample_psbm(const ModelParams& params, std::uint64_t seed) {
  return sample_psbm_with_affinity(params, params.W, seed);
}

CouplingDraw sample_sbm_via_coupling(const ModelParams& params, std::uint64_t seed,
                                     int max_attempts) {
  if (max_attempts <= 0) throw Error(ErrorCode::InvalidArgument, "max_attempts must be positive");
  const Matrix Wp = coupling_affinity(params);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    LabeledGraph g = sample_psbm_with_affinity(
        params, Wp, stream_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (g.is_simple()) {
      return {LabeledGraph(g.labels(), g.edges(), false), attempt};
    }
  }
  throw Error(ErrorCode::MaxAttemptsExceeded,
              "no simple draw in " + std::to_string(max_attempts) + " attempts");
}

void write_edge_list(std::ostream& os, const LabeledGraph& g) {
  os << "# n=" << g.n() << " K=" << g.K() << " labels=";
  for (std::size_t v = 0; v < g.n(); ++v) os << (v ? "," : "") << g.label(static_cast<VertexId>(v));
  os << '\n';
  for (const auto& e : g.edges()) os << e.u << ' ' << e.v << ' ' << e.multiplicity << '\n';
}

LabeledGraph read_edge_list(std::istream& is, const ModelParams* params) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::InvalidGraph, what); };
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw bad("missing header");

  std::size_t n = 0, K = 0;
  bool have_n = false, have_K = false, have_labels = false;
  std::vector<std::uint32_t> labels;
  std::istringstream header(line.substr(2));
  std::string tok;
  while (header >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw bad("malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "n") {
        n = std::stoull(val);
        have_n = true;
      } else if (key == "K") {
        K = std::stoull(val);
        have_K = true;
      } else if (key == "labels") {
        std::istringstream ls(val);
        std::string item;
        while (std::getline(ls, item, ',')) labels.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        have_labels = true;
      }
    } catch (const std::logic_error&) {
      throw bad("malformed header value '" + tok + "'");
    }
  }
  if (!have_n || !have_K || !have_labels) throw bad("header needs n, K and labels");
  if (labels.size() != n) throw bad("label count does not match n");
  std::vector<std::int64_t> counts(K, 0);
  for (auto l : labels) {
    if (l >= K) throw bad("label out of range");
    ++counts[l];
  }
  if (params) {
    if (params->K != K || params->community_sizes != counts)
      throw bad("labels do not match community sizes");
  }

  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;
  bool multi = false;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1, m = -1;
    if (!(ls >> u >> v >> m)) throw bad("malformed edge at line " + std::to_string(lineno));
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
      throw bad("vertex out of range at line " + std::to_string(lineno));
    if (m < 1 || m > static_cast<long long>(UINT32_MAX))
      throw bad("multiplicity must be positive at line " + std::to_string(lineno));
    const Edge e = canonical(static_cast<VertexId>(u), static_cast<VertexId>(v),
                             static_cast<std::uint32_t>(m));
    if (!seen.insert(pair_key(e.u, e.v)).second)
      throw bad("duplicate pair at line " + std::to_string(lineno));
    multi = multi || e.u == e.v || e.multiplicity > 1;
    edges.push_back(e);
  }
  return LabeledGraph(std::move(labels), std::move(edges), multi);
}

}  // namespace sbmsir
