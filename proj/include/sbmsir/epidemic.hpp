#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sbmsir/graph.hpp"
#include "sbmsir/model.hpp"

namespace sbmsir {

enum class Status : std::uint8_t { Susceptible, Infected, Recovered };

using Counts = std::vector<std::int64_t>;

// Per-community counts at one instant.
struct Snapshot {
  double t = 0.0;
  Counts S, I, R, X;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct InitialCondition {
  enum class DegreeMode { DrawPoisson, Explicit };

  // Per-community counts; the vertices are drawn uniformly inside each community.
  Counts infected;
  Counts recovered;
  // Explicit vertex lists. When infected_vertices is non-empty the counts are ignored.
  std::vector<VertexId> infected_vertices;
  std::vector<VertexId> recovered_vertices;

  DegreeMode degree_mode = DegreeMode::DrawPoisson;
  // Active half-edges per initially infected vertex, same order as the vertices
  // (explicit list, or community by community for counts). Exploration only.
  std::vector<std::uint32_t> active_degrees;

  static InitialCondition counts(Counts infected, Counts recovered = {});
};

// Throws InfeasibleInit.
void check_feasible(const Model& model, const InitialCondition& init);

inline constexpr std::uint64_t kDefaultEventCap = 1'000'000'000ULL;

#ifdef NDEBUG
inline constexpr bool kCheckInvariantsDefault = false;
#else
inline constexpr bool kCheckInvariantsDefault = true;
#endif

struct RunOptions {
  double horizon = std::numeric_limits<double>::infinity();
  // Output times, strictly increasing. Empty: record only the initial and final states.
  std::vector<double> grid;
  std::uint64_t event_cap = kDefaultEventCap;
  // Recount X and the per-community totals every 10^4 events.
  bool check_invariants = kCheckInvariantsDefault;
  // Called after every event with the post-event counts.
  std::function<void(const Snapshot&)> on_event;
};

struct Trajectory {
  std::vector<double> grid;        // requested grid, clipped to the horizon
  std::vector<Snapshot> samples;   // one per grid time, or {initial, final} without grid
  Snapshot initial;
  Snapshot final_state;
  std::vector<Status> final_status;
  std::uint64_t events = 0;
  bool extinct = false;
  // Largest per-vertex active degree seen during the run.
  std::uint64_t max_active_degree = 0;
};

// Exact Gillespie SIR on a fixed graph. X_k reports the number of
// infected-susceptible edges (with multiplicity) at infected vertices of
// community k, i.e. the half-edges that can still transmit.
Trajectory run_graph_sir(const LabeledGraph& graph, const Model& model,
                         const InitialCondition& init, std::uint64_t seed,
                         const RunOptions& options = {});

// Graph-free exploration process: the graph is revealed half-edge by half-edge.
Trajectory run_exploration(const Model& model, const InitialCondition& init, std::uint64_t seed,
                           const RunOptions& options = {});

// S(0) - S(inf) summed over communities.
std::int64_t final_size(const Snapshot& initial, const Snapshot& final_state);

// Throws IncompleteTrajectory unless the run ended by extinction.
bool detect_major_outbreak(const Trajectory& traj, std::int64_t threshold);

}  // namespace sbmsir
