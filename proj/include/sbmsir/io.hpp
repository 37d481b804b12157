#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbmsir/ensemble.hpp"
#include "sbmsir/epidemic.hpp"
#include "sbmsir/final_size.hpp"
#include "sbmsir/ode.hpp"

namespace sbmsir {

using Json = nlohmann::ordered_json;

// 17 significant digits: exact round trip for doubles.
std::string format_double(double v);

// Raw counts, one row per sample: t,S_1..S_K,I_1..I_K,R_1..R_K,X_1..X_K
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
// Ensemble mean in normalized units, same columns.
void write_ensemble_mean_csv(std::ostream& os, const EnsembleStats& stats);
// Normalized ODE solution in the same columns; R_k = rho_k - s_k - i_k.
// Optional trailing reff column; optional final row with t = inf.
void write_ode_csv(std::ostream& os, const OdeTrajectory& traj, const Vector& rho,
                   const std::vector<double>* reff = nullptr,
                   const OdeState* steady = nullptr, std::optional<double> steady_reff = {});

// {"K":2,"W":[[..]],"sizes":[..],"eta":..,"gamma":..}; K is optional on input.
Json to_json(const ModelParams& p);
// Throws ParseError on shape or type problems; does not validate the values.
ModelParams model_params_from_json(const Json& j);

Json to_json(const EnsembleStats& stats);
Json to_json(const FinalSizeReport& rep);
Json to_json(const SurvivalReport& rep);
Json to_json(const Snapshot& s);

// A time-indexed numeric table, read from either CSV or ensemble-stats JSON.
struct Table {
  std::vector<std::string> columns;  // without t
  std::vector<double> t;
  std::vector<std::vector<double>> rows;
};

// Throws ParseError.
Table read_csv_table(std::istream& is);
Table table_from_stats_json(const Json& j);
// Dispatches on the first non-blank character ('{' means JSON).
Table read_table(const std::string& path);

}  // namespace sbmsir
