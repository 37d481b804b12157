#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "sbmsir/branching.hpp"
#include "sbmsir/error.hpp"
#include "sbmsir/final_size.hpp"
#include "sbmsir/graph.hpp"
#include "sbmsir/ode.hpp"
#include "sbmsir/spectral.hpp"

namespace sbmsir::cli {

namespace fs = std::filesystem;

namespace {

Error config_error(const std::string& what) { return Error(ErrorCode::ParseError, what); }

template <class T>
T get_or(const Json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string("bad value for '") + key + "'");
  }
}

double parse_time(const Json& v, const char* what) {
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw config_error(std::string(what) + " must be a number or \"inf\"");
  return v.get<double>();
}

// Either an explicit list or {"t_end": T, "points": P}.
std::vector<double> parse_grid(const Json& g) {
  if (g.is_array()) return g.get<std::vector<double>>();
  if (g.is_object()) {
    const double t_end = get_or<double>(g, "t_end", -1.0);
    const auto points = get_or<std::size_t>(g, "points", 0);
    if (!(t_end >= 0.0)) throw config_error("grid.t_end must be non-negative");
    if (t_end > 0.0 && points < 2) throw config_error("grid needs at least 2 points when t_end > 0");
    return uniform_grid(t_end, points);
  }
  throw config_error("grid must be an array or {t_end, points}");
}

Counts to_counts(const Json& v, const char* what) {
  try {
    return v.get<Counts>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string(what) + " must be an integer array");
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain:
    case ErrorCode::StepSizeUnderflow:
    case ErrorCode::HorizonExceeded:
    case ErrorCode::SingularS:
    case ErrorCode::NoConvergence:
    case ErrorCode::QuadratureUnstable:
    case ErrorCode::EventCapExceeded:
    case ErrorCode::MaxAttemptsExceeded:
    case ErrorCode::IncompleteTrajectory:
    case ErrorCode::RunFailed:
      return kNumeric;
    default:
      return kUsage;
  }
}

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
  Json j;
  j["error"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config " + path + ": " + e.what());
  }
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw config_error("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw config_error("cannot write " + p.string());
  return f;
}

std::string run_file_name(std::size_t r, std::size_t n_runs) {
  std::ostringstream os;
  const int width = static_cast<int>(std::to_string(n_runs > 0 ? n_runs - 1 : 0).size());
  os << "run_" << std::setw(std::max(width, 4)) << std::setfill('0') << r << ".csv";
  return os.str();
}

// Normalized initial state implied by the config's init section.
OdeState ode_initial(const ExperimentConfig& cfg) {
  const auto& o = cfg.ode;
  const std::size_t K = cfg.model.K;
  if (!o.s0.empty()) {
    OdeState st;
    st.s = o.s0;
    st.i = o.i0.empty() ? Vector(K, 0.0) : o.i0;
    st.x = o.x0.empty() ? st.i : o.x0;
    if (st.s.size() != K || st.i.size() != K || st.x.size() != K)
      throw config_error("ode s0/i0/x0 must have length K");
    return st;
  }
  const double n = static_cast<double>(cfg.model.n());
  Vector s(K), i(K, 0.0);
  const auto& init = cfg.init;
  Counts I(K, 0), R(K, 0);
  if (!init.infected.empty()) {
    I = init.infected;
    if (!init.recovered.empty()) R = init.recovered;
  } else {
    const Model model(cfg.model);
    for (auto v : init.infected_vertices) ++I[model.label_of(v)];
    for (auto v : init.recovered_vertices) ++R[model.label_of(v)];
  }
  for (std::size_t k = 0; k < K; ++k) {
    s[k] = static_cast<double>(cfg.model.community_sizes[k] - I[k] - R[k]) / n;
    i[k] = static_cast<double>(I[k]) / n;
  }
  OdeState st = OdeState::with_x_equal_i(std::move(s), std::move(i));
  if (!o.x0.empty()) st.x = o.x0;
  return st;
}

Vector community_fractions(const ModelParams& p) {
  Vector rho(p.K);
  for (std::size_t k = 0; k < p.K; ++k)
    rho[k] = static_cast<double>(p.community_sizes[k]) / static_cast<double>(p.n());
  return rho;
}

Vector initial_susceptible(const Snapshot& s, std::int64_t n) {
  Vector out(s.S.size());
  for (std::size_t k = 0; k < s.S.size(); ++k) out[k] = static_cast<double>(s.S[k]) / static_cast<double>(n);
  return out;
}

// ---- subcommands -------------------------------------------------------

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model(cfg.model);
  EnsembleOptions opt;
  opt.n_runs = cfg.run.n_runs;
  opt.base_seed = cfg.run.seed;
  opt.mode = cfg.run.mode;
  opt.threads = cfg.run.threads;
  opt.run.horizon = cfg.run.horizon;
  opt.run.grid = cfg.run.grid;
  std::vector<Trajectory> trajs;
  const EnsembleStats stats =
      run_ensemble(model, cfg.init, opt, cfg.outputs.per_run_csv ? &trajs : nullptr);

  const fs::path dir = prepare_dir(cfg.outputs.directory);
  for (std::size_t r = 0; r < trajs.size(); ++r) {
    auto f = open_out(dir / run_file_name(r, trajs.size()));
    write_trajectory_csv(f, trajs[r]);
  }
  {
    auto f = open_out(dir / "stats.json");
    f << to_json(stats).dump(2) << '\n';
  }
  {
    auto f = open_out(dir / "mean.csv");
    write_ensemble_mean_csv(f, stats);
  }
  Json summary;
  summary["runs"] = stats.runs.size();
  summary["stats"] = (dir / "stats.json").string();
  summary["mean"] = (dir / "mean.csv").string();
  summary["per_run_csv"] = trajs.size();
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_ode(const ExperimentConfig& cfg, bool steady_flag, std::ostream& out) {
  const MeanFieldParams p = MeanFieldParams::from(cfg.model);
  validate(cfg.model);
  const OdeState y0 = ode_initial(cfg);
  std::vector<double> grid = cfg.ode.grid.empty() ? cfg.run.grid : cfg.ode.grid;
  if (grid.empty()) throw config_error("ode needs a grid (ode.grid or run.grid)");
  IntegratorOptions io;
  io.rel_tol = cfg.ode.rel_tol;
  io.abs_tol = cfg.ode.abs_tol;
  const OdeTrajectory traj = integrate(y0, p, grid, io);

  std::vector<double> reff;
  if (cfg.ode.reff)
    for (const auto& r : reff_along(traj, p)) reff.push_back(r.value);

  std::optional<SteadyStateResult> steady;
  std::optional<double> steady_reff;
  if (steady_flag || cfg.ode.steady_state) {
    steady = steady_state(y0, p, cfg.ode.x_tol, cfg.ode.t_max, io);
    if (cfg.ode.reff) steady_reff = r0(p, steady->state.s).value;
  }

  const fs::path dir = prepare_dir(cfg.outputs.directory);
  {
    auto f = open_out(dir / "ode.csv");
    write_ode_csv(f, traj, community_fractions(cfg.model), cfg.ode.reff ? &reff : nullptr,
                  steady ? &steady->state : nullptr, steady_reff);
  }
  bool all_positive = true;
  for (double v : y0.s) all_positive = all_positive && v > 0.0;
  Json summary;
  summary["ode"] = (dir / "ode.csv").string();
  summary["steps"] = traj.stats.steps;
  summary["rejected"] = traj.stats.rejected;
  if (all_positive) {
    const FinalSizeReport fsr = solve_final_size(p, y0.s, y0.x);
    auto f = open_out(dir / "final_size.json");
    f << to_json(fsr).dump(2) << '\n';
    summary["final_size"] = (dir / "final_size.json").string();
  }
  if (cfg.ode.reff) {
    if (auto t = herd_immunity_time(traj, p)) summary["herd_immunity_time"] = *t;
    else summary["herd_immunity_time"] = nullptr;
  }
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_final_size(const ExperimentConfig& cfg, std::ostream& out) {
  const MeanFieldParams p = MeanFieldParams::from(cfg.model);
  validate(cfg.model);
  const OdeState y0 = ode_initial(cfg);
  const FinalSizeReport fsr = solve_final_size(p, y0.s, y0.x);
  const SurvivalReport sr = survival_report(p, y0.s, cfg.outbreak.quadrature_nodes);
  Json j = to_json(fsr);
  j["pi"] = sr.pi;
  j["theta"] = sr.theta;
  j["quadrature_nodes"] = sr.quadrature_nodes;
  const fs::path dir = prepare_dir(cfg.outputs.directory);
  auto f = open_out(dir / "final_size.json");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_outbreak(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model(cfg.model);
  const MeanFieldParams p = MeanFieldParams::from(cfg.model);
  EnsembleOptions opt;
  opt.n_runs = cfg.outbreak.n_runs ? cfg.outbreak.n_runs : cfg.run.n_runs;
  opt.base_seed = cfg.run.seed;
  opt.mode = SimMode::Exploration;
  opt.threads = cfg.run.threads;
  const EnsembleStats stats = run_ensemble(model, cfg.init, opt);

  const std::int64_t n = model.n();
  const std::size_t K = model.K();
  const double threshold = std::pow(static_cast<double>(n), cfg.outbreak.threshold_exponent);
  const Vector s0 = initial_susceptible(stats.runs.front().initial, n);
  Counts I0 = stats.runs.front().initial.I;

  const SurvivalReport sr = survival_report(p, s0, cfg.outbreak.quadrature_nodes);
  Vector theta_s0(K);
  for (std::size_t k = 0; k < K; ++k) theta_s0[k] = sr.theta[k] * s0[k];
  const double gap_upper = cfg.outbreak.gap_fraction * sr.theta[0] * static_cast<double>(n);

  std::size_t outbreaks = 0, in_gap = 0;
  Vector attack(K, 0.0);
  for (const auto& r : stats.runs) {
    const auto size = static_cast<double>(final_size(r.initial, r.final_state));
    if (size > threshold) {
      ++outbreaks;
      for (std::size_t k = 0; k < K; ++k)
        attack[k] += static_cast<double>(r.initial.S[k] - r.final_state.S[k]) / static_cast<double>(n);
    }
    if (size > threshold && size < gap_upper) ++in_gap;
  }
  const double runs = static_cast<double>(stats.runs.size());
  const double freq = static_cast<double>(outbreaks) / runs;
  if (outbreaks > 0)
    for (double& a : attack) a /= static_cast<double>(outbreaks);

  Json j;
  j["n"] = n;
  j["runs"] = stats.runs.size();
  j["threshold"] = threshold;
  j["outbreaks"] = outbreaks;
  j["frequency"] = freq;
  j["frequency_stderr"] = std::sqrt(freq * (1.0 - freq) / runs);
  j["predicted_probability"] = outbreak_probability(sr.pi, I0);
  if (outbreaks > 0) j["conditional_mean_attack"] = attack;
  else j["conditional_mean_attack"] = nullptr;
  j["pi"] = sr.pi;
  j["theta"] = sr.theta;
  j["theta_s0"] = theta_s0;
  j["r0"] = sr.r0;
  j["gap_upper"] = gap_upper;
  j["gap_fraction"] = static_cast<double>(in_gap) / runs;
  const fs::path dir = prepare_dir(cfg.outputs.directory);
  auto f = open_out(dir / "outbreak.json");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_sample_graph(const ExperimentConfig& cfg, const std::string& kind,
                     const std::string& out_path, int max_attempts, std::ostream& out) {
  validate(cfg.model);
  LabeledGraph g;
  int attempts = 1;
  if (kind == "sbm") {
    g = sample_sbm(cfg.model, cfg.run.seed);
  } else if (kind == "psbm") {
    g = sample_psbm(cfg.model, cfg.run.seed);
  } else if (kind == "coupling") {
    CouplingDraw d = sample_sbm_via_coupling(cfg.model, cfg.run.seed, max_attempts);
    g = std::move(d.graph);
    attempts = d.attempts;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown graph kind '" + kind + "'");
  }
  fs::path path = out_path.empty() ? prepare_dir(cfg.outputs.directory) / "graph.txt" : fs::path(out_path);
  if (path.has_parent_path()) prepare_dir(path.parent_path().string());
  {
    auto f = open_out(path);
    write_edge_list(f, g);
  }
  Json j;
  j["graph"] = path.string();
  j["kind"] = kind;
  j["n"] = g.n();
  j["pairs"] = g.edges().size();
  j["edges_with_multiplicity"] = g.total_multiplicity();
  j["simple"] = g.is_simple();
  j["attempts"] = attempts;
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double tol,
                const std::vector<std::string>& only, std::ostream& out) {
  auto finite_rows = [](Table t) {
    Table kept;
    kept.columns = t.columns;
    for (std::size_t r = 0; r < t.t.size(); ++r) {
      if (!std::isfinite(t.t[r])) continue;
      kept.t.push_back(t.t[r]);
      kept.rows.push_back(std::move(t.rows[r]));
    }
    return kept;
  };
  const Table a = finite_rows(read_table(a_path));
  const Table b = finite_rows(read_table(b_path));
  if (a.t.size() != b.t.size())
    throw Error(ErrorCode::GridMismatch, "grids have " + std::to_string(a.t.size()) + " and " +
                                             std::to_string(b.t.size()) + " points");
  for (std::size_t r = 0; r < a.t.size(); ++r)
    if (std::abs(a.t[r] - b.t[r]) > 1e-9 * std::max(1.0, std::abs(a.t[r])))
      throw Error(ErrorCode::GridMismatch, "grid times differ at row " + std::to_string(r));

  auto index_of = [](const Table& t, const std::string& c) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == c) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  std::vector<std::string> cols;
  if (only.empty()) {
    for (const auto& c : a.columns)
      if (c != "reff" && index_of(b, c) >= 0) cols.push_back(c);
  } else {
    for (const auto& c : only) {
      if (index_of(a, c) < 0 || index_of(b, c) < 0)
        throw Error(ErrorCode::InvalidArgument, "column " + c + " missing from an input");
      cols.push_back(c);
    }
  }
  if (cols.empty()) throw Error(ErrorCode::GridMismatch, "no common columns");

  Json dist = Json::object();
  double worst = 0.0;
  for (const auto& c : cols) {
    const auto ia = static_cast<std::size_t>(index_of(a, c));
    const auto ib = static_cast<std::size_t>(index_of(b, c));
    double d = 0.0;
    for (std::size_t r = 0; r < a.t.size(); ++r) d = std::max(d, std::abs(a.rows[r][ia] - b.rows[r][ib]));
    dist[c] = d;
    worst = std::max(worst, d);
  }
  const bool pass = worst <= tol;
  Json j;
  j["tol"] = tol;
  j["distances"] = std::move(dist);
  j["max_distance"] = worst;
  j["pass"] = pass;
  out << j.dump(2) << '\n';
  return pass ? kOk : kCompareFailed;
}

}  // namespace

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw config_error("override must look like a.b=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &config;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) {
    if (key.empty()) throw config_error("empty key in override " + path);
    keys.push_back(key);
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object()) throw config_error("override path " + path + " crosses a non-object");
    node = &(*node)[keys[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) throw config_error("override path " + path + " crosses a non-object");
  (*node)[keys.back()] = std::move(value);
}

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw config_error("config must be a JSON object");
  if (!j.contains("model")) throw config_error("config needs a model section");
  cfg.model = model_params_from_json(j.at("model"));
  validate(cfg.model);
  const std::size_t K = cfg.model.K;
  const double n = static_cast<double>(cfg.model.n());

  const Json init = j.value("init", Json::object());
  if (init.contains("infected_vertices")) {
    cfg.init.infected_vertices = init.at("infected_vertices").get<std::vector<VertexId>>();
    if (init.contains("recovered_vertices"))
      cfg.init.recovered_vertices = init.at("recovered_vertices").get<std::vector<VertexId>>();
  } else if (init.contains("infected")) {
    cfg.init.infected = to_counts(init.at("infected"), "init.infected");
    if (init.contains("recovered")) cfg.init.recovered = to_counts(init.at("recovered"), "init.recovered");
  } else if (init.contains("infected_fraction")) {
    // Fractions of n, as in the normalized state.
    const auto f = init.at("infected_fraction").get<Vector>();
    if (f.size() != K) throw config_error("init.infected_fraction must have length K");
    for (double v : f) cfg.init.infected.push_back(std::llround(v * n));
  } else {
    cfg.init.infected.assign(K, 0);
  }
  if (init.contains("active_degrees")) {
    cfg.init.degree_mode = InitialCondition::DegreeMode::Explicit;
    cfg.init.active_degrees = init.at("active_degrees").get<std::vector<std::uint32_t>>();
  }
  check_feasible(Model(cfg.model), cfg.init);

  const Json run = j.value("run", Json::object());
  const std::string mode = get_or<std::string>(run, "mode", "exploration");
  if (mode == "exploration") cfg.run.mode = SimMode::Exploration;
  else if (mode == "graph") cfg.run.mode = SimMode::Graph;
  else throw config_error("run.mode must be 'exploration' or 'graph'");
  cfg.run.n_runs = get_or<std::size_t>(run, "n_runs", 1);
  if (cfg.run.n_runs < 1) throw config_error("run.n_runs must be at least 1");
  if (run.contains("horizon")) cfg.run.horizon = parse_time(run.at("horizon"), "run.horizon");
  if (run.contains("grid")) cfg.run.grid = parse_grid(run.at("grid"));
  if (cfg.run.horizon > 0.0 && run.contains("grid") && cfg.run.grid.size() < 2)
    throw config_error("grid must have at least 2 points when horizon > 0");
  cfg.run.seed = get_or<std::uint64_t>(run, "seed", 1);
  cfg.run.threads = get_or<unsigned>(run, "threads", 1);

  const Json ode = j.value("ode", Json::object());
  if (ode.contains("grid")) cfg.ode.grid = parse_grid(ode.at("grid"));
  cfg.ode.s0 = get_or<Vector>(ode, "s0", {});
  cfg.ode.i0 = get_or<Vector>(ode, "i0", {});
  cfg.ode.x0 = get_or<Vector>(ode, "x0", {});
  cfg.ode.reff = get_or<bool>(ode, "reff", true);
  cfg.ode.steady_state = get_or<bool>(ode, "steady_state", false);
  cfg.ode.rel_tol = get_or<double>(ode, "rel_tol", cfg.ode.rel_tol);
  cfg.ode.abs_tol = get_or<double>(ode, "abs_tol", cfg.ode.abs_tol);
  cfg.ode.x_tol = get_or<double>(ode, "x_tol", cfg.ode.x_tol);
  cfg.ode.t_max = get_or<double>(ode, "t_max", cfg.ode.t_max);

  const Json ob = j.value("outbreak", Json::object());
  cfg.outbreak.n_runs = get_or<std::size_t>(ob, "n_runs", 0);
  cfg.outbreak.threshold_exponent = get_or<double>(ob, "threshold_exponent", 2.0 / 3.0);
  cfg.outbreak.gap_fraction = get_or<double>(ob, "gap_fraction", 0.25);
  cfg.outbreak.quadrature_nodes = get_or<int>(ob, "quadrature_nodes", 64);

  const Json outputs = j.value("outputs", Json::object());
  cfg.outputs.directory = get_or<std::string>(outputs, "directory", "out");
  cfg.outputs.per_run_csv = get_or<bool>(outputs, "per_run_csv", true);
  return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Dotted overrides are pulled out before CLI11 sees the arguments.
  static const std::regex override_re(R"(^--([A-Za-z_]\w*(\.\w+)+=.*)$)");
  std::vector<std::string> plain, overrides;
  for (const auto& a : args) {
    std::smatch m;
    if (std::regex_match(a, m, override_re)) overrides.push_back(m[1]);
    else plain.push_back(a);
  }

  CLI::App app{"Epidemics on stochastic block models"};
  app.require_subcommand(1);
  std::string config_path;
  bool steady = false;
  std::string kind = "sbm", graph_out;
  int max_attempts = kDefaultMaxAttempts;
  std::string cmp_a, cmp_b;
  double tol = 0.02;
  std::vector<std::string> columns;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
  };
  CLI::App* simulate = app.add_subcommand("simulate", "run an ensemble of stochastic epidemics");
  add_config(simulate);
  CLI::App* ode = app.add_subcommand("ode", "integrate the limit ODE");
  add_config(ode);
  ode->add_flag("--steady-state", steady, "append the steady state as a t=inf row");
  CLI::App* compare = app.add_subcommand("compare", "sup-norm distance between two tables");
  compare->add_option("a", cmp_a, "stats JSON or CSV")->required();
  compare->add_option("b", cmp_b, "stats JSON or CSV")->required();
  compare->add_option("--tol", tol, "pass threshold");
  compare->add_option("--columns", columns, "columns to compare")->delimiter(',');
  CLI::App* outbreak = app.add_subcommand("outbreak", "outbreak frequency vs survival probability");
  add_config(outbreak);
  CLI::App* final_size_cmd = app.add_subcommand("final-size", "final size, R0 and survival probabilities");
  add_config(final_size_cmd);
  CLI::App* sample = app.add_subcommand("sample-graph", "draw a labeled graph");
  add_config(sample);
  sample->add_option("--kind", kind, "sbm, psbm or coupling");
  sample->add_option("--out", graph_out, "edge-list path");
  sample->add_option("--max-attempts", max_attempts, "coupling sampler attempts");

  try {
    std::vector<std::string> reversed(plain.rbegin(), plain.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", e.what());
    return kUsage;
  }

  try {
    if (compare->parsed()) {
      if (!overrides.empty()) throw config_error("compare takes no config overrides");
      return cmd_compare(cmp_a, cmp_b, tol, columns, out);
    }
    Json raw = load_json(config_path);
    for (const auto& o : overrides) apply_override(raw, o);
    const ExperimentConfig cfg = parse_config(raw);
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (ode->parsed()) return cmd_ode(cfg, steady, out);
    if (outbreak->parsed()) return cmd_outbreak(cfg, out);
    if (final_size_cmd->parsed()) return cmd_final_size(cfg, out);
    if (sample->parsed()) return cmd_sample_graph(cfg, kind, graph_out, max_attempts, out);
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    report_error(err, "ParseError", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what());
    return kNumeric;
  }
  return kUsage;
}

}  // namespace sbmsir::cli
