#include <cmath>
#include <sstream>

#include "sbmsir/graph.hpp"
#include "sbmsir/model.hpp"
#include "test_util.hpp"

using namespace sbmsir;
using testutil::params;

namespace {

std::string serialize(const LabeledGraph& g) {
  std::ostringstream os;
  write_edge_list(os, g);
  return os.str();
}

LabeledGraph parse(const std::string& text, const ModelParams* p = nullptr) {
  std::istringstream is(text);
  return read_edge_list(is, p);
}

}  // namespace

TEST_CASE("labels come in contiguous blocks matching the sizes") {
  const auto p = params({{2, 1}, {1, 3}}, {3, 2});
  CHECK(block_labels(p) == std::vector<std::uint32_t>{0, 0, 0, 1, 1});
  const LabeledGraph g = sample_sbm(p, 1);
  CHECK(g.n() == 5);
  CHECK(g.K() == 2);
}

TEST_CASE("sampling is deterministic in the seed") {
  // Sparse enough that simple PSBM draws are common.
  const auto p = params({{1, 0.5}, {0.5, 1}}, {300, 200});
  CHECK(serialize(sample_sbm(p, 42)) == serialize(sample_sbm(p, 42)));
  CHECK(serialize(sample_psbm(p, 42)) == serialize(sample_psbm(p, 42)));
  CHECK(serialize(sample_sbm_via_coupling(p, 42).graph) ==
        serialize(sample_sbm_via_coupling(p, 42).graph));
  CHECK(serialize(sample_sbm(p, 42)) != serialize(sample_sbm(p, 43)));
}

TEST_CASE("vanishing affinity gives an empty graph") {
  const auto p = params({{1e-9}}, {100});
  CHECK(sample_sbm(p, 3).edges().empty());
  CHECK(sample_psbm(p, 3).edges().empty());
}

TEST_CASE("sbm output is simple and its edge probabilities match W/n") {
  const auto p = params({{10, 1}, {1, 10}}, {1000, 1000});
  const double n = 2000.0;
  const int samples = 200;
  double within = 0.0, across = 0.0;
  for (int s = 0; s < samples; ++s) {
    const LabeledGraph g = sample_sbm(p, 1000 + s);
    REQUIRE(g.is_simple());
    REQUIRE_FALSE(g.is_multigraph());
    for (const Edge& e : g.edges()) (g.label(e.u) == g.label(e.v) ? within : across) += 1.0;
  }
  const double pairs_within = samples * 2.0 * (1000.0 * 999.0 / 2.0);
  const double pairs_across = samples * 1000.0 * 1000.0;
  const double p_in = 10.0 / n, p_out = 1.0 / n;
  const double se_in = std::sqrt(p_in * (1 - p_in) / pairs_within);
  const double se_out = std::sqrt(p_out * (1 - p_out) / pairs_across);
  CHECK(std::abs(within / pairs_within - p_in) < 3 * se_in);
  CHECK(std::abs(across / pairs_across - p_out) < 3 * se_out);
}

TEST_CASE("sbm edge count concentrates") {
  const auto p = params({{10, 1}, {1, 10}}, {1000, 1000});
  const double mean = 2 * (1000.0 * 999.0 / 2.0) * 10.0 / 2000.0 + 1000.0 * 1000.0 / 2000.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double m = static_cast<double>(sample_sbm(p, seed).edges().size());
    CHECK(std::abs(m - mean) < 4 * std::sqrt(mean));
  }
}

TEST_CASE("dense blocks use the direct sampler and stay simple") {
  const auto p = params({{30, 5}, {5, 40}}, {40, 40});
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(sample_sbm(p, seed).is_simple());
}

TEST_CASE("psbm degree means match D") {
  const auto p = params({{10, 1}, {1, 10}}, {400, 200});
  const Vector D = mean_degrees(p);
  const int samples = 500;
  std::vector<double> sum(2, 0.0), sumsq(2, 0.0);
  std::vector<double> count(2, 0.0);
  for (int s = 0; s < samples; ++s) {
    const LabeledGraph g = sample_psbm(p, 7000 + s);
    CHECK(g.is_multigraph());
    const auto deg = g.degrees();
    for (VertexId v = 0; v < g.n(); ++v) {
      const auto k = g.label(v);
      sum[k] += static_cast<double>(deg[v]);
      sumsq[k] += static_cast<double>(deg[v]) * static_cast<double>(deg[v]);
      count[k] += 1.0;
    }
  }
  for (int k = 0; k < 2; ++k) {
    const double mean = sum[k] / count[k];
    const double var = sumsq[k] / count[k] - mean * mean;
    // Degrees inside one graph are weakly dependent; the per-vertex SE is a
    // slight underestimate, compensated by using the sample variance.
    const double se = std::sqrt(var / count[k]) * std::sqrt(2.0);
    CHECK(std::abs(mean - D[k]) < 3 * se);
  }
}

TEST_CASE("psbm on two vertices: P(A12 = 0) = exp(-1/2)") {
  const auto p = params({{1}}, {2});
  const int samples = 100000;
  int zero = 0;
  for (int s = 0; s < samples; ++s) {
    const LabeledGraph g = sample_psbm(p, static_cast<std::uint64_t>(s));
    if (g.multiplicity(0, 1) == 0) ++zero;
    CHECK_FALSE(g.multiplicity(0, 1) != g.multiplicity(1, 0));
  }
  const double p0 = std::exp(-0.5);
  const double sigma = std::sqrt(p0 * (1 - p0) / samples);
  CHECK(std::abs(zero / static_cast<double>(samples) - p0) < 3 * sigma);
}

TEST_CASE("coupling sampler matches the sbm edge marginal") {
  const auto p = params({{2}}, {500});
  const int draws = 300;
  double edges = 0.0;
  for (int s = 0; s < draws; ++s) {
    const CouplingDraw d = sample_sbm_via_coupling(p, static_cast<std::uint64_t>(s));
    REQUIRE(d.graph.is_simple());
    CHECK(d.attempts >= 1);
    edges += static_cast<double>(d.graph.edges().size());
  }
  const double pairs = draws * 500.0 * 499.0 / 2.0;
  const double q = 2.0 / 500.0;
  CHECK(std::abs(edges / pairs - q) < 3 * std::sqrt(q * (1 - q) / pairs));
}

TEST_CASE("coupling sampler gives up on dense affinities") {
  const auto p = params({{9}}, {10});
  CHECK_ERROR_CODE(sample_sbm_via_coupling(p, 1, 1), ErrorCode::MaxAttemptsExceeded);
  CHECK_ERROR_CODE(sample_sbm_via_coupling(p, 1, 5), ErrorCode::MaxAttemptsExceeded);
}

TEST_CASE("edge list round trip is exact") {
  const auto p = params({{10, 1}, {1, 10}}, {60, 40});
  for (const LabeledGraph& g : {sample_sbm(p, 5), sample_psbm(p, 5)}) {
    const std::string text = serialize(g);
    const LabeledGraph back = parse(text, &p);
    CHECK(back == g);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("adjacency drops self-loops and mirrors edges") {
  const LabeledGraph g({0, 0, 0}, {{0, 0, 2}, {0, 1, 3}, {1, 2, 1}}, true);
  const Adjacency adj(g);
  CHECK(adj.neighbors(0).size() == 1);
  CHECK(adj.neighbors(0)[0].neighbor == 1);
  CHECK(adj.neighbors(0)[0].multiplicity == 3);
  CHECK(adj.neighbors(1).size() == 2);
  CHECK(adj.neighbors(2).size() == 1);
  CHECK(g.degrees() == std::vector<std::uint64_t>{5, 4, 1});
  CHECK(g.total_multiplicity() == 6);
  CHECK_FALSE(g.is_simple());
}

TEST_CASE("edge list loader rejects invalid input") {
  const auto p = params({{1, 0}, {0, 1}}, {2, 1});
  CHECK_NOTHROW(parse("# n=3 K=2 labels=0,0,1\n0 1 1\n", &p));
  CHECK_ERROR_CODE(parse("0 1 1\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,1\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,1,2\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,0,1\n0 3 1\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,0,1\n0 1 0\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,0,1\n0 1 1\n1 0 1\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,0,1\n0 1\n"), ErrorCode::InvalidGraph);
  CHECK_ERROR_CODE(parse("# n=3 K=2 labels=0,1,1\n", &p), ErrorCode::InvalidGraph);

  const LabeledGraph multi = parse("# n=3 K=2 labels=0,0,1\n0 0 1\n");
  CHECK(multi.is_multigraph());
  const LabeledGraph simple = parse("# n=3 K=2 labels=0,0,1\n2 1 1\n");
  CHECK_FALSE(simple.is_multigraph());
  CHECK(simple.multiplicity(1, 2) == 1);
}
