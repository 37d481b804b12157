#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sbmsir {

// dy = f(t, y)
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct IntegratorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  std::uint64_t max_steps = 100'000'000;
  // Entries in (-clamp_tol, 0) are reset to zero after each step; anything
  // lower raises OutOfDomain. Disable for fields that may go negative.
  bool nonnegative = true;
  double clamp_tol = 1e-10;
};

struct IntegratorStats {
  std::uint64_t steps = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rhs_evals = 0;
};

// Dormand-Prince 5(4) with FSAL and the standard 4th-order dense output.
class Dopri5 {
 public:
  Dopri5(Rhs f, std::vector<double> y0, double t0, IntegratorOptions options = {});

  double t() const noexcept { return t_; }
  const std::vector<double>& y() const noexcept { return y_; }
  const std::vector<double>& dy() const noexcept { return k_[0]; }
  double t_prev() const noexcept { return t_prev_; }
  const IntegratorStats& stats() const noexcept { return stats_; }

  // One accepted step, never past t_stop. Throws StepSizeUnderflow.
  void step(double t_stop);
  // Interpolant over the last accepted step, t in [t_prev(), t()].
  std::vector<double> dense(double t) const;

 private:
  void eval(double t, std::span<const double> y, std::span<double> dy);
  double initial_step(double t_stop);
  void clamp(std::vector<double>& y) const;

  Rhs f_;
  IntegratorOptions opt_;
  std::size_t dim_;
  double t_, t_prev_, h_ = 0.0;
  std::vector<double> y_, y_prev_;
  std::vector<std::vector<double>> k_;  // k1..k7
  std::vector<std::vector<double>> rcont_;
  std::vector<double> ytmp_, yerr_;
  IntegratorStats stats_;
  bool have_dense_ = false;
};

struct GridSolution {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  IntegratorStats stats;
};

// Solution sampled at the grid (non-decreasing, first entry >= t0).
GridSolution integrate_on_grid(const Rhs& f, std::vector<double> y0, double t0,
                               const std::vector<double>& grid,
                               const IntegratorOptions& options = {});

}  // namespace sbmsir
