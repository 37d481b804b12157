#include "sbmsir/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "sbmsir/error.hpp"
#include "sbmsir/rng.hpp"

namespace sbmsir {

namespace {

constexpr std::uint64_t kGraphStreamSalt = 0x6a09e667f3bcc909ULL;

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

struct RunResult {
  RunSummary summary;
  std::vector<std::vector<double>> rows;
  Trajectory traj;
};

RunResult one_run(const Model& model, const InitialCondition& init,
                  const EnsembleOptions& opt, std::size_t r, bool keep) {
  const std::uint64_t seed = stream_seed(opt.base_seed, r);
  Trajectory traj;
  if (opt.mode == SimMode::Graph) {
    const LabeledGraph g = sample_psbm(model.params(), seed ^ kGraphStreamSalt);
    traj = run_graph_sir(g, model, init, seed, opt.run);
  } else {
    traj = run_exploration(model, init, seed, opt.run);
  }
  RunResult out;
  out.summary = {seed, traj.initial, traj.final_state, traj.extinct, traj.events,
                 traj.max_active_degree};
  out.rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.rows.push_back(normalized_row(model, s));
  if (keep) out.traj = std::move(traj);
  return out;
}

}  // namespace

std::vector<std::string> state_columns(std::size_t K) {
  std::vector<std::string> cols;
  for (const char* name : {"S", "I", "R", "X"})
    for (std::size_t k = 1; k <= K; ++k) cols.push_back(std::string(name) + "_" + std::to_string(k));
  return cols;
}

std::vector<double> normalized_row(const Model& model, const Snapshot& s) {
  const std::size_t K = model.K();
  const double n = static_cast<double>(model.n());
  const auto& D = model.derived().D;
  std::vector<double> row(4 * K);
  for (std::size_t k = 0; k < K; ++k) {
    row[k] = static_cast<double>(s.S[k]) / n;
    row[K + k] = static_cast<double>(s.I[k]) / n;
    row[2 * K + k] = static_cast<double>(s.R[k]) / n;
    row[3 * K + k] = static_cast<double>(s.X[k]) / (n * D[k]);
  }
  return row;
}

EnsembleStats run_ensemble(const Model& model, const InitialCondition& init,
                           const EnsembleOptions& opt, std::vector<Trajectory>* trajectories) {
  if (opt.n_runs == 0) throw Error(ErrorCode::InvalidArgument, "n_runs must be at least 1");
  if (opt.run.on_event) throw Error(ErrorCode::InvalidArgument, "ensembles take no event callback");
  check_feasible(model, init);

  std::vector<RunResult> results(opt.n_runs);
  std::vector<std::exception_ptr> errors(opt.n_runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < opt.n_runs;) {
      try {
        results[r] = one_run(model, init, opt, r, trajectories != nullptr);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned threads = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : opt.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, opt.n_runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t r = 0; r < opt.n_runs; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const Error& e) {
      throw Error(e.code(), "run " + std::to_string(r) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::RunFailed, "run " + std::to_string(r) + ": " + e.what());
    }
  }

  EnsembleStats stats;
  stats.columns = state_columns(model.K());
  const std::size_t rows = results[0].rows.size();
  if (opt.run.grid.empty()) {
    // Without a grid only the initial row is shared across runs.
    stats.grid = {0.0};
  } else {
    for (double g : opt.run.grid)
      if (g <= opt.run.horizon) stats.grid.push_back(g);
    for (const auto& res : results)
      if (res.rows.size() != rows)
        throw Error(ErrorCode::GridMismatch, "runs produced different sample counts");
  }
  const std::size_t used = opt.run.grid.empty() ? 1 : rows;
  const std::size_t cols = stats.columns.size();
  const double runs = static_cast<double>(opt.n_runs);
  stats.mean.assign(used, std::vector<double>(cols, 0.0));
  stats.std.assign(used, std::vector<double>(cols, 0.0));
  for (std::size_t j = 0; j < used; ++j) {
    for (std::size_t c = 0; c < cols; ++c) {
      Kahan sum;
      for (const auto& res : results) sum.add(res.rows[j][c]);
      const double mean = sum.sum / runs;
      Kahan sq;
      for (const auto& res : results) {
        const double d = res.rows[j][c] - mean;
        sq.add(d * d);
      }
      stats.mean[j][c] = mean;
      stats.std[j][c] = opt.n_runs > 1 ? std::sqrt(sq.sum / (runs - 1.0)) : 0.0;
    }
  }
  stats.runs.reserve(opt.n_runs);
  for (auto& res : results) stats.runs.push_back(std::move(res.summary));
  if (trajectories) {
    trajectories->clear();
    for (auto& res : results) trajectories->push_back(std::move(res.traj));
  }
  return stats;
}

}  // namespace sbmsir
