#include "sbmsir/epidemic.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "sbmsir/error.hpp"
#include "sbmsir/rng.hpp"

namespace sbmsir {

namespace {

constexpr std::uint64_t kAuditEvery = 10'000;

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t i, std::int64_t delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  // Smallest i with prefix(i + 1) > target, for 0 <= target < total.
  std::size_t find(std::int64_t target) const {
    std::size_t pos = 0;
    const std::size_t n = tree_.size() - 1;
    for (std::size_t step = std::bit_floor(n); step; step >>= 1) {
      if (pos + step <= n && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<std::int64_t> tree_;
};

// Vertex bookkeeping shared by both modes. weight[v] is the number of
// half-edges of v that can still fire: d_v in exploration, the
// infected-susceptible cut at v on a graph.
class Core {
 public:
  Core(const Model& model, std::vector<std::uint32_t> labels) : label_(std::move(labels)) {
    const std::size_t K = model.K();
    members_.resize(K);
    local_.resize(label_.size());
    for (std::size_t v = 0; v < label_.size(); ++v) {
      auto& m = members_[label_[v]];
      local_[v] = static_cast<std::uint32_t>(m.size());
      m.push_back(static_cast<VertexId>(v));
    }
    for (std::size_t k = 0; k < K; ++k) fenwick_.emplace_back(members_[k].size());
    status_.assign(label_.size(), Status::Susceptible);
    weight_.assign(label_.size(), 0);
    pos_.assign(label_.size(), 0);
    infected_.resize(K);
    snap_.S.assign(K, 0);
    snap_.I.assign(K, 0);
    snap_.R.assign(K, 0);
    snap_.X.assign(K, 0);
    for (std::size_t k = 0; k < K; ++k) snap_.S[k] = static_cast<std::int64_t>(members_[k].size());
  }

  std::size_t K() const { return members_.size(); }
  std::uint32_t label(VertexId v) const { return label_[v]; }
  Status status(VertexId v) const { return status_[v]; }
  std::int64_t weight(VertexId v) const { return weight_[v]; }
  const std::vector<VertexId>& members(std::size_t k) const { return members_[k]; }
  const Snapshot& snap() const { return snap_; }
  double& t() { return snap_.t; }
  std::uint64_t max_weight() const { return max_weight_; }
  const std::vector<Status>& statuses() const { return status_; }

  void set_weight(VertexId v, std::int64_t w) {
    const std::int64_t delta = w - weight_[v];
    if (delta == 0) return;
    fenwick_[label_[v]].add(local_[v], delta);
    snap_.X[label_[v]] += delta;
    weight_[v] = w;
    max_weight_ = std::max(max_weight_, static_cast<std::uint64_t>(w));
  }

  void mark_infected(VertexId v) {
    const auto k = label_[v];
    status_[v] = Status::Infected;
    --snap_.S[k];
    ++snap_.I[k];
    pos_[v] = static_cast<std::uint32_t>(infected_[k].size());
    infected_[k].push_back(v);
  }

  void mark_recovered_initially(VertexId v) {
    const auto k = label_[v];
    status_[v] = Status::Recovered;
    --snap_.S[k];
    ++snap_.R[k];
  }

  void recover(VertexId v) {
    const auto k = label_[v];
    set_weight(v, 0);
    status_[v] = Status::Recovered;
    auto& list = infected_[k];
    const VertexId last = list.back();
    list[pos_[v]] = last;
    pos_[last] = pos_[v];
    list.pop_back();
    --snap_.I[k];
    ++snap_.R[k];
  }

  VertexId pick_infected(std::size_t k, Rng& rng) const {
    return infected_[k][uniform_index(rng, infected_[k].size())];
  }

  // A vertex of community k chosen proportionally to its weight.
  VertexId pick_weighted(std::size_t k, Rng& rng) const {
    const auto r = static_cast<std::int64_t>(
        uniform_index(rng, static_cast<std::uint64_t>(snap_.X[k])));
    return members_[k][fenwick_[k].find(r)];
  }

  void audit() const {
    for (std::size_t k = 0; k < K(); ++k) {
      std::int64_t s = 0, i = 0, r = 0, x = 0;
      for (VertexId v : members_[k]) {
        s += status_[v] == Status::Susceptible;
        i += status_[v] == Status::Infected;
        r += status_[v] == Status::Recovered;
        if (weight_[v] < 0 || (weight_[v] > 0 && status_[v] != Status::Infected))
          throw std::logic_error("bad per-vertex weight");
        x += weight_[v];
      }
      if (s != snap_.S[k] || i != snap_.I[k] || r != snap_.R[k] || x != snap_.X[k] ||
          i != static_cast<std::int64_t>(infected_[k].size()))
        throw std::logic_error("epidemic bookkeeping out of sync in community " +
                               std::to_string(k));
    }
  }

 private:
  std::vector<std::uint32_t> label_;
  std::vector<std::uint32_t> local_;
  std::vector<std::vector<VertexId>> members_;
  std::vector<Fenwick> fenwick_;
  std::vector<Status> status_;
  std::vector<std::int64_t> weight_;
  std::vector<std::vector<VertexId>> infected_;
  std::vector<std::uint32_t> pos_;
  Snapshot snap_;
  std::uint64_t max_weight_ = 0;
};

class ExplorationMode {
 public:
  ExplorationMode(const Model& model, Core& core) : core_(core) {
    const std::size_t K = model.K();
    const auto& P = model.derived().P;
    cumulative_.assign(K, Vector(K, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t l = 0; l < K; ++l) cumulative_[k][l] = acc += P(k, l);
      degree_.emplace_back(model.derived().D[k]);
    }
  }

  void infect(VertexId v, Rng& rng) {
    core_.mark_infected(v);
    core_.set_weight(v, degree_[core_.label(v)](rng));
  }

  void infect_with_degree(VertexId v, std::uint32_t d) {
    core_.mark_infected(v);
    core_.set_weight(v, d);
  }

  void fire(std::size_t k, Rng& rng) {
    const VertexId v = core_.pick_weighted(k, rng);
    core_.set_weight(v, core_.weight(v) - 1);
    const auto& cum = cumulative_[k];
    const double u = uniform01(rng) * cum.back();
    std::size_t l = 0;
    while (l + 1 < cum.size() && u >= cum[l]) ++l;
    const auto& targets = core_.members(l);
    const VertexId w = targets[uniform_index(rng, targets.size())];
    if (core_.status(w) == Status::Susceptible) infect(w, rng);
  }

 private:
  Core& core_;
  std::vector<Vector> cumulative_;
  std::vector<std::poisson_distribution<std::uint32_t>> degree_;
};

class GraphMode {
 public:
  GraphMode(const LabeledGraph& graph, Core& core) : adj_(graph), core_(core) {}

  void infect(VertexId u, Rng&) {
    core_.mark_infected(u);
    std::int64_t cut = 0;
    for (const auto& [w, m] : adj_.neighbors(u)) {
      const Status s = core_.status(w);
      if (s == Status::Susceptible) cut += m;
      else if (s == Status::Infected) core_.set_weight(w, core_.weight(w) - m);
    }
    core_.set_weight(u, cut);
  }

  void fire(std::size_t k, Rng& rng) {
    const VertexId v = core_.pick_weighted(k, rng);
    auto r = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(core_.weight(v))));
    for (const auto& [w, m] : adj_.neighbors(v)) {
      if (core_.status(w) != Status::Susceptible) continue;
      r -= m;
      if (r < 0) {
        infect(w, rng);
        return;
      }
    }
    throw std::logic_error("cut weight out of sync");
  }

 private:
  Adjacency adj_;
  Core& core_;
};

std::vector<std::uint32_t> model_labels(const Model& model) {
  return block_labels(model.params());
}

// Draws the initial vertex sets: recovered first, then infected, so the
// infection routine sees the final status of every other seed.
struct Seeds {
  std::vector<VertexId> infected;
  std::vector<VertexId> recovered;
};

Seeds draw_seeds(const Core& core, const InitialCondition& init, Rng& rng) {
  Seeds seeds;
  if (!init.infected_vertices.empty() || init.infected.empty()) {
    seeds.infected = init.infected_vertices;
    seeds.recovered = init.recovered_vertices;
    return seeds;
  }
  for (std::size_t k = 0; k < core.K(); ++k) {
    const auto& pool = core.members(k);
    const auto ni = static_cast<std::size_t>(init.infected[k]);
    const auto nr = init.recovered.empty() ? 0 : static_cast<std::size_t>(init.recovered[k]);
    const std::size_t m = ni + nr;
    if (m == 0) continue;
    // Floyd's algorithm for m distinct positions, then a shuffle for the split.
    std::unordered_set<std::size_t> taken;
    std::vector<std::size_t> chosen;
    chosen.reserve(m);
    for (std::size_t j = pool.size() - m; j < pool.size(); ++j) {
      std::size_t pick = uniform_index(rng, j + 1);
      if (!taken.insert(pick).second) {
        pick = j;
        taken.insert(j);
      }
      chosen.push_back(pick);
    }
    for (std::size_t i = chosen.size(); i > 1; --i)
      std::swap(chosen[i - 1], chosen[uniform_index(rng, i)]);
    for (std::size_t i = 0; i < ni; ++i) seeds.infected.push_back(pool[chosen[i]]);
    for (std::size_t i = ni; i < m; ++i) seeds.recovered.push_back(pool[chosen[i]]);
  }
  return seeds;
}

std::vector<double> clip_grid(const RunOptions& opt) {
  if (!(opt.horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  std::vector<double> grid;
  for (std::size_t j = 0; j < opt.grid.size(); ++j) {
    if (j > 0 && !(opt.grid[j] > opt.grid[j - 1]))
      throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing");
    if (opt.grid[j] < 0.0) throw Error(ErrorCode::InvalidArgument, "grid times must be >= 0");
    if (opt.grid[j] <= opt.horizon) grid.push_back(opt.grid[j]);
  }
  return grid;
}

template <class Mode>
Trajectory event_loop(const Model& model, Core& core, Mode& mode, Rng& rng,
                      const RunOptions& opt) {
  Trajectory traj;
  traj.grid = clip_grid(opt);
  traj.initial = core.snap();
  if (opt.check_invariants) core.audit();

  const std::size_t K = model.K();
  const double eta = model.eta(), gamma = model.gamma();
  std::size_t gi = 0;
  auto record_until = [&](double t_limit) {
    while (gi < traj.grid.size() && traj.grid[gi] < t_limit) {
      Snapshot s = core.snap();
      s.t = traj.grid[gi++];
      traj.samples.push_back(std::move(s));
    }
  };

  for (;;) {
    const Snapshot& cur = core.snap();
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      total += gamma * static_cast<double>(cur.I[k]) + eta * static_cast<double>(cur.X[k]);
    if (total <= 0.0) {
      traj.extinct = true;
      break;
    }
    const double t_next = cur.t + exponential(rng, total);
    record_until(t_next);
    if (t_next > opt.horizon) {
      core.t() = opt.horizon;
      break;
    }
    if (traj.events >= opt.event_cap)
      throw Error(ErrorCode::EventCapExceeded,
                  "event cap " + std::to_string(opt.event_cap) + " reached at t=" +
                      std::to_string(cur.t));
    core.t() = t_next;

    double u = uniform01(rng) * total;
    std::size_t k = 0;
    bool recovery = true;
    // Last category with positive rate, in case rounding leaves u past the end.
    std::size_t last_k = 0;
    bool last_recovery = true;
    for (k = 0; k < K; ++k) {
      const double rr = gamma * static_cast<double>(cur.I[k]);
      if (rr > 0.0) {
        last_k = k;
        last_recovery = true;
        if (u < rr) break;
        u -= rr;
      }
      const double rx = eta * static_cast<double>(cur.X[k]);
      if (rx > 0.0) {
        last_k = k;
        last_recovery = false;
        if (u < rx) {
          recovery = false;
          break;
        }
        u -= rx;
      }
    }
    if (k == K) {
      k = last_k;
      recovery = last_recovery;
    }
    if (recovery) core.recover(core.pick_infected(k, rng));
    else mode.fire(k, rng);

    ++traj.events;
    if (opt.on_event) opt.on_event(core.snap());
    if (opt.check_invariants && traj.events % kAuditEvery == 0) core.audit();
  }

  record_until(std::numeric_limits<double>::infinity());
  if (opt.check_invariants) core.audit();
  traj.final_state = core.snap();
  traj.final_status = core.statuses();
  traj.max_active_degree = core.max_weight();
  if (opt.grid.empty()) {
    traj.samples.push_back(traj.initial);
    if (traj.final_state.t > traj.initial.t) traj.samples.push_back(traj.final_state);
  }
  return traj;
}

template <class Mode>
void seed_core(Core& core, Mode& mode, const InitialCondition& init, Rng& rng,
               bool explicit_degrees) {
  const Seeds seeds = draw_seeds(core, init, rng);
  for (VertexId v : seeds.recovered) core.mark_recovered_initially(v);
  for (std::size_t j = 0; j < seeds.infected.size(); ++j) {
    if constexpr (std::is_same_v<Mode, ExplorationMode>) {
      if (explicit_degrees) {
        mode.infect_with_degree(seeds.infected[j], init.active_degrees[j]);
        continue;
      }
    }
    mode.infect(seeds.infected[j], rng);
  }
}

}  // namespace

InitialCondition InitialCondition::counts(Counts infected, Counts recovered) {
  InitialCondition init;
  init.infected = std::move(infected);
  init.recovered = std::move(recovered);
  return init;
}

void check_feasible(const Model& model, const InitialCondition& init) {
  auto fail = [](const std::string& what) { return Error(ErrorCode::InfeasibleInit, what); };
  const std::size_t K = model.K();
  const auto n = static_cast<std::uint64_t>(model.n());
  std::size_t n_infected = 0;
  if (!init.infected_vertices.empty() || init.infected.empty()) {
    std::vector<std::uint8_t> seen(n, 0);
    for (auto* list : {&init.infected_vertices, &init.recovered_vertices}) {
      for (VertexId v : *list) {
        if (v >= n) throw fail("vertex " + std::to_string(v) + " out of range");
        if (seen[v]++) throw fail("vertex " + std::to_string(v) + " listed twice");
      }
    }
    n_infected = init.infected_vertices.size();
  } else {
    if (init.infected.size() != K) throw fail("infected counts must have length K");
    if (!init.recovered.empty() && init.recovered.size() != K)
      throw fail("recovered counts must have length K");
    for (std::size_t k = 0; k < K; ++k) {
      const std::int64_t r = init.recovered.empty() ? 0 : init.recovered[k];
      if (init.infected[k] < 0 || r < 0) throw fail("negative initial count");
      if (init.infected[k] + r > model.size(k))
        throw fail("initial counts exceed community " + std::to_string(k + 1) + " size");
      n_infected += static_cast<std::size_t>(init.infected[k]);
    }
  }
  if (init.degree_mode == InitialCondition::DegreeMode::Explicit &&
      init.active_degrees.size() != n_infected)
    throw fail("need one explicit active degree per infected vertex");
}

Trajectory run_exploration(const Model& model, const InitialCondition& init, std::uint64_t seed,
                           const RunOptions& options) {
  check_feasible(model, init);
  Rng rng = make_rng(seed);
  Core core(model, model_labels(model));
  ExplorationMode mode(model, core);
  seed_core(core, mode, init, rng,
            init.degree_mode == InitialCondition::DegreeMode::Explicit);
  return event_loop(model, core, mode, rng, options);
}

Trajectory run_graph_sir(const LabeledGraph& graph, const Model& model,
                         const InitialCondition& init, std::uint64_t seed,
                         const RunOptions& options) {
  check_feasible(model, init);
  if (init.degree_mode == InitialCondition::DegreeMode::Explicit)
    throw Error(ErrorCode::InfeasibleInit, "explicit active degrees need the exploration process");
  if (graph.n() != static_cast<std::size_t>(model.n()))
    throw Error(ErrorCode::InvalidGraph, "graph size does not match the model");
  Counts counts(model.K(), 0);
  for (auto l : graph.labels()) {
    if (l >= model.K()) throw Error(ErrorCode::InvalidGraph, "graph label out of range");
    ++counts[l];
  }
  if (counts != model.params().community_sizes)
    throw Error(ErrorCode::InvalidGraph, "graph labels do not match community sizes");

  Rng rng = make_rng(seed);
  Core core(model, graph.labels());
  GraphMode mode(graph, core);
  seed_core(core, mode, init, rng, false);
  return event_loop(model, core, mode, rng, options);
}

std::int64_t final_size(const Snapshot& initial, const Snapshot& final_state) {
  std::int64_t total = 0;
  for (std::size_t k = 0; k < initial.S.size(); ++k) total += initial.S[k] - final_state.S[k];
  return total;
}

bool detect_major_outbreak(const Trajectory& traj, std::int64_t threshold) {
  if (!traj.extinct)
    throw Error(ErrorCode::IncompleteTrajectory, "run stopped at the horizon before extinction");
  return final_size(traj.initial, traj.final_state) > threshold;
}

}  // namespace sbmsir
