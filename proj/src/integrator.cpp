#include "sbmsir/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

}  // namespace

Dopri5::Dopri5(Rhs f, std::vector<double> y0, double t0, IntegratorOptions options)
    : f_(std::move(f)),
      opt_(options),
      dim_(y0.size()),
      t_(t0),
      t_prev_(t0),
      y_(std::move(y0)),
      y_prev_(y_),
      k_(7, std::vector<double>(dim_)),
      rcont_(5, std::vector<double>(dim_)),
      ytmp_(dim_),
      yerr_(dim_) {
  if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (opt_.nonnegative) clamp(y_);
  eval(t_, y_, k_[0]);
}

void Dopri5::eval(double t, std::span<const double> y, std::span<double> dy) {
  f_(t, y, dy);
  ++stats_.rhs_evals;
}

void Dopri5::clamp(std::vector<double>& y) const {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= 0.0) continue;
    if (y[i] > -opt_.clamp_tol) {
      y[i] = 0.0;
    } else {
      throw Error(ErrorCode::OutOfDomain,
                  "component " + std::to_string(i) + " went negative: " + std::to_string(y[i]));
    }
  }
}

double Dopri5::initial_step(double t_stop) {
  if (opt_.initial_step > 0.0) return opt_.initial_step;
  // Hairer-Norsett-Wanner heuristic.
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(y_[i]);
    dnf += (k_[0][i] / sk) * (k_[0][i] / sk);
    dny += (y_[i] / sk) * (y_[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, t_stop - t_);
  if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
  for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y_[i] + h * k_[0][i];
  eval(t_ + h, ytmp_, k_[1]);
  double der2 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(y_[i]);
    const double d = (k_[1][i] - k_[0][i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2 / static_cast<double>(std::max<std::size_t>(dim_, 1))) / h;
  const double der12 = std::max(der2, std::sqrt(dnf / static_cast<double>(std::max<std::size_t>(dim_, 1))));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, t_stop - t_});
}

void Dopri5::step(double t_stop) {
  if (!(t_stop > t_)) throw Error(ErrorCode::InvalidArgument, "step target must lie ahead");
  if (h_ <= 0.0) h_ = initial_step(t_stop);
  auto& k1 = k_[0];
  auto& k2 = k_[1];
  auto& k3 = k_[2];
  auto& k4 = k_[3];
  auto& k5 = k_[4];
  auto& k6 = k_[5];
  auto& k7 = k_[6];
  std::vector<double> y1(dim_);

  for (;;) {
    if (stats_.steps + stats_.rejected >= opt_.max_steps)
      throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted at t=" + std::to_string(t_));
    double h = std::min(h_, t_stop - t_);
    if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
    if (h < h_floor && t_stop - t_ > h_floor)
      throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at t=" + std::to_string(t_));

    for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y_[i] + h * a21 * k1[i];
    eval(t_ + c2 * h, ytmp_, k2);
    for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(t_ + c3 * h, ytmp_, k3);
    for (std::size_t i = 0; i < dim_; ++i)
      ytmp_[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(t_ + c4 * h, ytmp_, k4);
    for (std::size_t i = 0; i < dim_; ++i)
      ytmp_[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(t_ + c5 * h, ytmp_, k5);
    for (std::size_t i = 0; i < dim_; ++i)
      ytmp_[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = (h == t_stop - t_) ? t_stop : t_ + h;
    eval(t_new, ytmp_, k6);
    for (std::size_t i = 0; i < dim_; ++i)
      y1[i] = y_[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(t_new, y1, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      yerr_[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
      err += (yerr_[i] / sk) * (yerr_[i] / sk);
    }
    err = dim_ == 0 ? 0.0 : std::sqrt(err / static_cast<double>(dim_));
    if (!std::isfinite(err)) err = 1e10;

    const double fac = err == 0.0 ? kFacMax
                                  : std::clamp(kSafety * std::pow(err, -0.2), kFacMin, kFacMax);
    if (err <= 1.0) {
      for (std::size_t i = 0; i < dim_; ++i) {
        const double ydiff = y1[i] - y_[i];
        const double bspl = h * k1[i] - ydiff;
        rcont_[0][i] = y_[i];
        rcont_[1][i] = ydiff;
        rcont_[2][i] = bspl;
        rcont_[3][i] = ydiff - h * k7[i] - bspl;
        rcont_[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                            d7 * k7[i]);
      }
      y_prev_ = y_;
      t_prev_ = t_;
      t_ = t_new;
      bool clamped = false;
      if (opt_.nonnegative) {
        for (double v : y1) clamped = clamped || v < 0.0;
        clamp(y1);
      }
      y_.swap(y1);
      if (clamped) eval(t_, y_, k1);
      else k1.swap(k7);
      h_ = h * std::min(fac, kFacMax);
      ++stats_.steps;
      have_dense_ = true;
      return;
    }
    ++stats_.rejected;
    h_ = h * std::max(fac, kFacMin);
  }
}

std::vector<double> Dopri5::dense(double t) const {
  std::vector<double> out(dim_);
  if (!have_dense_ || t_ == t_prev_) return y_;
  const double theta = (t - t_prev_) / (t_ - t_prev_);
  const double theta1 = 1.0 - theta;
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = rcont_[0][i] +
             theta * (rcont_[1][i] +
                      theta1 * (rcont_[2][i] + theta * (rcont_[3][i] + theta1 * rcont_[4][i])));
  }
  if (opt_.nonnegative) {
    for (double& v : out)
      if (v < 0.0 && v > -opt_.clamp_tol) v = 0.0;
  }
  return out;
}

GridSolution integrate_on_grid(const Rhs& f, std::vector<double> y0, double t0,
                               const std::vector<double>& grid, const IntegratorOptions& options) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < t0 || (j > 0 && grid[j] < grid[j - 1]))
      throw Error(ErrorCode::InvalidArgument, "grid must be non-decreasing and start at or after t0");
  }
  GridSolution sol;
  Dopri5 solver(f, std::move(y0), t0, options);
  for (double g : grid) {
    while (solver.t() < g) solver.step(grid.back());
    sol.t.push_back(g);
    sol.y.push_back(g == solver.t() ? solver.y() : solver.dense(g));
  }
  sol.stats = solver.stats();
  return sol;
}

}  // namespace sbmsir
