#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "sbmsir/ensemble.hpp"
#include "sbmsir/io.hpp"
#include "sbmsir/model.hpp"

namespace sbmsir::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCompareFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kNumeric = 3;

struct ExperimentConfig {
  ModelParams model;
  InitialCondition init;

  struct Run {
    SimMode mode = SimMode::Exploration;
    std::size_t n_runs = 1;
    double horizon = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    std::uint64_t seed = 1;
    unsigned threads = 1;
  } run;

  struct Ode {
    std::vector<double> grid;
    Vector s0, i0, x0;  // defaults derived from init
    bool reff = true;
    bool steady_state = false;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double x_tol = 1e-10;
    double t_max = 1e4;
  } ode;

  struct Outbreak {
    std::size_t n_runs = 0;  // 0: use run.n_runs
    double threshold_exponent = 2.0 / 3.0;
    double gap_fraction = 0.25;
    int quadrature_nodes = 64;
  } outbreak;

  struct Outputs {
    std::string directory = "out";
    bool per_run_csv = true;
  } outputs;
};

// Applies "a.b.c=value" overrides; value is parsed as JSON when possible.
void apply_override(Json& config, const std::string& assignment);
// Throws sbmsir::Error (ParseError and the model validation codes).
ExperimentConfig parse_config(const Json& config);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbmsir::cli
