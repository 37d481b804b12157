#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbmsir/integrator.hpp"
#include "sbmsir/model.hpp"

namespace sbmsir {

// Normalized state: s_k = S_k/n, i_k = I_k/n, x_k = X_k/(n D_k).
struct OdeState {
  Vector s, i, x;

  std::size_t K() const noexcept { return s.size(); }
  // (s_1..s_K, i_1..i_K, x_1..x_K)
  Vector flat() const;
  static OdeState from_flat(const Vector& y);
  // x(0) = i(0)
  static OdeState with_x_equal_i(Vector s, Vector i);

  friend bool operator==(const OdeState&, const OdeState&) = default;
};

inline constexpr double kNegativeTol = 1e-10;
inline constexpr double kDomainSlack = 1e-9;

// Non-negativity (up to kNegativeTol) and sum(s+i) <= 1, sum(s+x) <= 2.
bool in_domain(const Vector& y, std::size_t K);
// Throws OutOfDomain.
void check_domain(const Vector& y, std::size_t K);

// b(y), unchecked; used as the integrator right-hand side.
void vector_field_into(const MeanFieldParams& p, std::span<const double> y, std::span<double> dy);
// Checks the domain first.
Vector vector_field(const Vector& y, const MeanFieldParams& p);

// F_k = eta sum_l x_l W_lk, so ds_k/dt = -F_k s_k.
Vector force_of_infection(const Vector& y, const MeanFieldParams& p);
// dF/dt along the flow: -(eta+gamma) F_k + eta sum_l W_lk s_l F_l.
Vector force_of_infection_rate(const Vector& y, const MeanFieldParams& p);

enum class OdeTermination { HorizonReached, SteadyState };

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<Vector> y;  // flat states at t
  IntegratorStats stats;
  OdeTermination termination = OdeTermination::HorizonReached;

  std::size_t K() const noexcept { return y.empty() ? 0 : y.front().size() / 3; }
};

// Solution of the limit system on the grid, starting from y0 at t = 0.
OdeTrajectory integrate(const OdeState& y0, const MeanFieldParams& p,
                        const std::vector<double>& grid, const IntegratorOptions& options = {});

inline constexpr double kSteadyXTol = 1e-10;
inline constexpr double kSteadyTMax = 1e4;

struct SteadyStateResult {
  OdeState state;  // s frozen, i = x = 0
  double t = 0.0;  // time at which both norms fell below x_tol
  IntegratorStats stats;
};

// Integrates until ||x||_1 < x_tol and ||i||_1 < x_tol. Throws HorizonExceeded.
SteadyStateResult steady_state(const OdeState& y0, const MeanFieldParams& p,
                               double x_tol = kSteadyXTol, double t_max = kSteadyTMax,
                               const IntegratorOptions& options = {});

// Local maxima of component `index` of the flat state: grid intervals where
// the analytic derivative changes sign from + to -, refined on the cubic
// Hermite interpolant.
std::vector<double> peak_times(const OdeTrajectory& traj, const MeanFieldParams& p,
                               std::size_t index);

// First time a sampled series crosses `level` from above, linearly interpolated.
std::optional<double> first_down_crossing(const std::vector<double>& t,
                                          const std::vector<double>& v, double level);

// Pair approximation, state (s, i, y) with y_k the infected-susceptible edge density.
// Throws SingularS if some s_k <= 1e-12.
Vector pair_approx_field(const Vector& state, const MeanFieldParams& p);
// y_k(0) = s_k(0) F_k(0) / eta.
Vector pair_approx_initial(const OdeState& y0, const MeanFieldParams& p);
OdeTrajectory integrate_pair_approx(const Vector& state0, const MeanFieldParams& p,
                                    const std::vector<double>& grid,
                                    const IntegratorOptions& options = {});

struct HeteroParams {
  Matrix eta;    // eta_kl > 0
  Vector gamma;  // gamma_k > 0

  static HeteroParams homogeneous(std::size_t K, double eta, double gamma);
};

void validate(const HeteroParams& h, std::size_t K);

// State (s_1..s_K, i_1..i_K, x_11, x_12, ..., x_KK).
Vector hetero_vector_field(const Vector& state, const Matrix& W, const HeteroParams& h);
// x_kl(0) = i_k(0)
Vector hetero_initial(const Vector& s0, const Vector& i0);
OdeTrajectory integrate_hetero(const Vector& state0, const Matrix& W, const HeteroParams& h,
                               const std::vector<double>& grid,
                               const IntegratorOptions& options = {});
// C_kl = eta_kl / (eta_kl + gamma_k) W_kl s_l
Matrix hetero_next_generation(const Vector& s, const Matrix& W, const HeteroParams& h);

// Evenly spaced grid with `points` entries on [0, t_end].
std::vector<double> uniform_grid(double t_end, std::size_t points);

}  // namespace sbmsir
