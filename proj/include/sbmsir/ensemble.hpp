#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmsir/epidemic.hpp"

namespace sbmsir {

enum class SimMode { Graph, Exploration };

struct EnsembleOptions {
  std::size_t n_runs = 1;
  std::uint64_t base_seed = 0;
  SimMode mode = SimMode::Exploration;
  RunOptions run;           // grid, horizon, event cap
  unsigned threads = 1;     // 0: hardware concurrency
};

struct RunSummary {
  std::uint64_t seed = 0;
  Snapshot initial;
  Snapshot final_state;
  bool extinct = false;
  std::uint64_t events = 0;
  std::uint64_t max_active_degree = 0;
  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

// Columns are normalized: S_k/n, I_k/n, R_k/n, X_k/(n D_k).
struct EnsembleStats {
  std::vector<std::string> columns;     // "S_1".."X_K"
  std::vector<double> grid;
  std::vector<std::vector<double>> mean;  // [grid point][column]
  std::vector<std::vector<double>> std;   // sample standard deviation, 0 for one run
  std::vector<RunSummary> runs;

  friend bool operator==(const EnsembleStats&, const EnsembleStats&) = default;
};

std::vector<std::string> state_columns(std::size_t K);

// Normalized state row in column order.
std::vector<double> normalized_row(const Model& model, const Snapshot& s);

// Graph mode samples a fresh PSBM for every run. Run r is seeded with
// stream_seed(base_seed, r). Per-run errors are rethrown with the run index.
// When `trajectories` is given it receives every run's full trajectory.
EnsembleStats run_ensemble(const Model& model, const InitialCondition& init,
                           const EnsembleOptions& options,
                           std::vector<Trajectory>* trajectories = nullptr);

}  // namespace sbmsir
