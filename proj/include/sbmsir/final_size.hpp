#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbmsir/epidemic.hpp"
#include "sbmsir/model.hpp"
#include "sbmsir/ode.hpp"
#include "sbmsir/quadrature.hpp"
#include "sbmsir/spectral.hpp"

namespace sbmsir {

// Spectral radius of (eta/(eta+gamma)) W diag(s0).
SpectralReport r0(const MeanFieldParams& p, const Vector& s0);
// R_eff at every grid time of an integrated trajectory.
std::vector<SpectralReport> reff_along(const OdeTrajectory& traj, const MeanFieldParams& p);
// First time R_eff drops to 1; none if R_eff(0) <= 1 or 1 is never crossed.
std::optional<double> herd_immunity_time(const OdeTrajectory& traj, const MeanFieldParams& p);
// (eta+gamma)(1 - R_inf), the asymptotic decay rate of x after herd immunity.
double herd_decay_rate(const MeanFieldParams& p, const Vector& s_inf);

inline constexpr double kFixedPointTol = 1e-12;
inline constexpr std::int64_t kFixedPointMaxIter = 1'000'000;
inline constexpr std::int64_t kAitkenAfter = 1'000;

struct FixedPointResult {
  Vector q;
  std::int64_t iterations = 0;
  double residual = 0.0;  // ||q - F(q)||_inf
};

// Monotone iteration q <- F(q) from q = 0 for an increasing map of [0,1]^K
// into itself. Aitken extrapolation is tried after kAitkenAfter plain steps
// and kept only if it stays below the smallest fixed point.
FixedPointResult monotone_fixed_point(const std::function<Vector(const Vector&)>& F,
                                      std::size_t K, double tol = kFixedPointTol,
                                      std::int64_t max_iter = kFixedPointMaxIter);

struct FinalSizeReport {
  Vector s_inf;
  Vector attack;  // s0 - s_inf
  Vector q;       // s_inf / s0
  std::int64_t iterations = 0;
  double residual = 0.0;
  double r0 = 0.0;
  // x0 = 0 with R0 > 1: the constant solution q = 1 was returned, while an
  // outbreak branch also exists (see survival_backward).
  bool degenerate = false;
};

FinalSizeReport solve_final_size(const MeanFieldParams& p, const Vector& s0, const Vector& x0,
                                 double tol = kFixedPointTol);

struct SurvivalVector {
  Vector prob;  // 1 - q
  Vector q;     // extinction probabilities
  std::int64_t iterations = 0;
  double residual = 0.0;
};

// theta: survival of the Poisson process with mean matrix C = c W diag(s0).
SurvivalVector survival_backward(const MeanFieldParams& p, const Vector& s0,
                                 double tol = kFixedPointTol);
// pi: survival of the forward infection tree, Gauss-Laguerre in gamma*T.
SurvivalVector survival_forward(const MeanFieldParams& p, const Vector& s0,
                                int quadrature_nodes = kDefaultQuadratureNodes,
                                double tol = kFixedPointTol);

struct SurvivalReport {
  Vector pi;
  Vector theta;
  double r0 = 0.0;
  int quadrature_nodes = kDefaultQuadratureNodes;
  std::string method;
};

SurvivalReport survival_report(const MeanFieldParams& p, const Vector& s0,
                               int quadrature_nodes = kDefaultQuadratureNodes);

// 1 - prod_k (1 - pi_k)^{I0_k}
double outbreak_probability(const Vector& pi, const Counts& I0);

}  // namespace sbmsir
