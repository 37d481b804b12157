#include "sbmsir/io.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

void write_header(std::ostream& os, std::size_t K, bool reff) {
  os << 't';
  for (const auto& c : state_columns(K)) os << ',' << c;
  if (reff) os << ",reff";
  os << '\n';
}

double parse_number(const std::string& cell) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not a number: '" + cell + "'");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

Json vec_json(const Vector& v) { return Json(v); }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t K = traj.initial.S.size();
  write_header(os, K, false);
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    for (const Counts* c : {&s.S, &s.I, &s.R, &s.X})
      for (auto v : *c) os << ',' << v;
    os << '\n';
  }
}

void write_ensemble_mean_csv(std::ostream& os, const EnsembleStats& stats) {
  os << 't';
  for (const auto& c : stats.columns) os << ',' << c;
  os << '\n';
  for (std::size_t j = 0; j < stats.mean.size(); ++j) {
    os << format_double(stats.grid[j]);
    for (double v : stats.mean[j]) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_ode_csv(std::ostream& os, const OdeTrajectory& traj, const Vector& rho,
                   const std::vector<double>* reff, const OdeState* steady,
                   std::optional<double> steady_reff) {
  const std::size_t K = rho.size();
  write_header(os, K, reff != nullptr);
  auto row = [&](const std::string& t, const Vector& y, std::optional<double> r) {
    os << t;
    for (std::size_t k = 0; k < K; ++k) os << ',' << format_double(y[k]);
    for (std::size_t k = 0; k < K; ++k) os << ',' << format_double(y[K + k]);
    for (std::size_t k = 0; k < K; ++k) os << ',' << format_double(rho[k] - y[k] - y[K + k]);
    for (std::size_t k = 0; k < K; ++k) os << ',' << format_double(y[2 * K + k]);
    if (reff) os << ',' << format_double(r.value_or(std::nan("")));
    os << '\n';
  };
  for (std::size_t j = 0; j < traj.t.size(); ++j)
    row(format_double(traj.t[j]), traj.y[j], reff ? std::optional<double>((*reff)[j]) : std::nullopt);
  if (steady) row("inf", steady->flat(), steady_reff);
}

Json to_json(const ModelParams& p) {
  Json j;
  j["K"] = p.K;
  Json rows = Json::array();
  for (std::size_t r = 0; r < p.W.rows(); ++r) {
    Vector row(p.W.cols());
    for (std::size_t c = 0; c < p.W.cols(); ++c) row[c] = p.W(r, c);
    rows.push_back(row);
  }
  j["W"] = std::move(rows);
  j["sizes"] = p.community_sizes;
  j["eta"] = p.eta;
  j["gamma"] = p.gamma;
  return j;
}

ModelParams model_params_from_json(const Json& j) {
  ModelParams p;
  try {
    const auto rows = j.at("W").get<std::vector<Vector>>();
    p.K = rows.size();
    if (j.contains("K") && j.at("K").get<std::size_t>() != p.K)
      throw Error(ErrorCode::ParseError, "K does not match the size of W");
    p.W = Matrix(p.K, p.K);
    for (std::size_t r = 0; r < p.K; ++r) {
      if (rows[r].size() != p.K) throw Error(ErrorCode::ParseError, "W must be K x K");
      for (std::size_t c = 0; c < p.K; ++c) p.W(r, c) = rows[r][c];
    }
    p.community_sizes = j.at("sizes").get<std::vector<std::int64_t>>();
    p.eta = j.at("eta").get<double>();
    p.gamma = j.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model: ") + e.what());
  }
  return p;
}

Json to_json(const Snapshot& s) {
  Json j;
  j["t"] = s.t;
  j["S"] = s.S;
  j["I"] = s.I;
  j["R"] = s.R;
  j["X"] = s.X;
  return j;
}

Json to_json(const EnsembleStats& stats) {
  Json j;
  j["columns"] = stats.columns;
  j["grid"] = stats.grid;
  Json mean = Json::object(), sd = Json::object();
  for (std::size_t c = 0; c < stats.columns.size(); ++c) {
    Vector m, s;
    for (std::size_t r = 0; r < stats.mean.size(); ++r) {
      m.push_back(stats.mean[r][c]);
      s.push_back(stats.std[r][c]);
    }
    mean[stats.columns[c]] = m;
    sd[stats.columns[c]] = s;
  }
  j["mean"] = std::move(mean);
  j["std"] = std::move(sd);
  Json runs = Json::array();
  for (const auto& r : stats.runs) {
    Json e;
    e["seed"] = r.seed;
    e["extinct"] = r.extinct;
    e["events"] = r.events;
    e["max_active_degree"] = r.max_active_degree;
    e["initial"] = to_json(r.initial);
    e["final"] = to_json(r.final_state);
    runs.push_back(std::move(e));
  }
  j["runs"] = std::move(runs);
  return j;
}

Json to_json(const FinalSizeReport& rep) {
  Json j;
  j["s_inf"] = vec_json(rep.s_inf);
  j["q"] = vec_json(rep.q);
  j["attack"] = vec_json(rep.attack);
  j["r0"] = rep.r0;
  j["residual"] = rep.residual;
  j["iterations"] = rep.iterations;
  j["degenerate"] = rep.degenerate;
  return j;
}

Json to_json(const SurvivalReport& rep) {
  Json j;
  j["pi"] = vec_json(rep.pi);
  j["theta"] = vec_json(rep.theta);
  j["r0"] = rep.r0;
  j["quadrature_nodes"] = rep.quadrature_nodes;
  j["method"] = rep.method;
  return j;
}

Table read_csv_table(std::istream& is) {
  Table table;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty CSV");
  auto header = split(line);
  if (header.empty() || header[0] != "t") throw Error(ErrorCode::ParseError, "CSV must start with a t column");
  table.columns.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, "wrong cell count on line " + std::to_string(lineno));
    table.t.push_back(parse_number(cells[0]));
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_number(cells[c]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table table_from_stats_json(const Json& j) {
  Table table;
  try {
    table.columns = j.at("columns").get<std::vector<std::string>>();
    table.t = j.at("grid").get<std::vector<double>>();
    const auto& mean = j.at("mean");
    table.rows.assign(table.t.size(), std::vector<double>(table.columns.size()));
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto col = mean.at(table.columns[c]).get<std::vector<double>>();
      if (col.size() != table.t.size())
        throw Error(ErrorCode::ParseError, "column " + table.columns[c] + " has the wrong length");
      for (std::size_t r = 0; r < col.size(); ++r) table.rows[r][c] = col[r];
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad stats JSON: ") + e.what());
  }
  return table;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  in.clear();
  in.seekg(0);
  if (first == '{') {
    try {
      return table_from_stats_json(Json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("bad JSON in ") + path + ": " + e.what());
    }
  }
  return read_csv_table(in);
}

}  // namespace sbmsir
