#include "sbmsir/ode.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

constexpr double kSingularS = 1e-12;

OdeTrajectory from_grid_solution(GridSolution sol) {
  OdeTrajectory traj;
  traj.t = std::move(sol.t);
  traj.y = std::move(sol.y);
  traj.stats = sol.stats;
  return traj;
}

void check_grid(const std::vector<double>& grid) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] >= 0.0) || (j > 0 && !(grid[j] > grid[j - 1])))
      throw Error(ErrorCode::InvalidArgument, "grid must be non-negative and strictly increasing");
  }
}

}  // namespace

Vector OdeState::flat() const {
  Vector y;
  y.reserve(3 * K());
  y.insert(y.end(), s.begin(), s.end());
  y.insert(y.end(), i.begin(), i.end());
  y.insert(y.end(), x.begin(), x.end());
  return y;
}

OdeState OdeState::from_flat(const Vector& y) {
  if (y.size() % 3 != 0) throw Error(ErrorCode::InvalidArgument, "flat state length must be 3K");
  const std::size_t K = y.size() / 3;
  OdeState st;
  st.s.assign(y.begin(), y.begin() + K);
  st.i.assign(y.begin() + K, y.begin() + 2 * K);
  st.x.assign(y.begin() + 2 * K, y.end());
  return st;
}

OdeState OdeState::with_x_equal_i(Vector s, Vector i) {
  OdeState st;
  st.s = std::move(s);
  st.x = i;
  st.i = std::move(i);
  return st;
}

bool in_domain(const Vector& y, std::size_t K) {
  if (y.size() != 3 * K) return false;
  double si = 0.0, sx = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (double v : {y[k], y[K + k], y[2 * K + k]})
      if (!(v >= -kNegativeTol) || !std::isfinite(v)) return false;
    si += y[k] + y[K + k];
    sx += y[k] + y[2 * K + k];
  }
  return si <= 1.0 + kDomainSlack && sx <= 2.0 + kDomainSlack;
}

void check_domain(const Vector& y, std::size_t K) {
  if (y.size() != 3 * K) throw Error(ErrorCode::InvalidArgument, "state must have length 3K");
  if (!in_domain(y, K)) throw Error(ErrorCode::OutOfDomain, "state outside the invariant domain");
}

void vector_field_into(const MeanFieldParams& p, std::span<const double> y, std::span<double> dy) {
  const std::size_t K = p.K();
  const double eta = p.eta, gamma = p.gamma;
  for (std::size_t k = 0; k < K; ++k) {
    double pressure = 0.0;
    for (std::size_t l = 0; l < K; ++l) pressure += y[2 * K + l] * p.W(l, k);
    const double ds = -eta * y[k] * pressure;
    dy[k] = ds;
    dy[K + k] = -gamma * y[K + k] - ds;
    dy[2 * K + k] = -(eta + gamma) * y[2 * K + k] - ds;
  }
}

Vector vector_field(const Vector& y, const MeanFieldParams& p) {
  check_domain(y, p.K());
  Vector dy(y.size());
  vector_field_into(p, y, dy);
  return dy;
}

Vector force_of_infection(const Vector& y, const MeanFieldParams& p) {
  const std::size_t K = p.K();
  Vector F(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) F[k] += p.eta * y[2 * K + l] * p.W(l, k);
  return F;
}

Vector force_of_infection_rate(const Vector& y, const MeanFieldParams& p) {
  const std::size_t K = p.K();
  const Vector F = force_of_infection(y, p);
  Vector dF(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double gain = 0.0;
    for (std::size_t l = 0; l < K; ++l) gain += p.W(l, k) * y[l] * F[l];
    dF[k] = -(p.eta + p.gamma) * F[k] + p.eta * gain;
  }
  return dF;
}

OdeTrajectory integrate(const OdeState& y0, const MeanFieldParams& p,
                        const std::vector<double>& grid, const IntegratorOptions& options) {
  validate(p);
  const Vector flat = y0.flat();
  check_domain(flat, p.K());
  check_grid(grid);
  Rhs f = [&p](double, std::span<const double> y, std::span<double> dy) {
    vector_field_into(p, y, dy);
  };
  OdeTrajectory traj = from_grid_solution(integrate_on_grid(f, flat, 0.0, grid, options));
  for (const auto& y : traj.y) check_domain(y, p.K());
  return traj;
}

SteadyStateResult steady_state(const OdeState& y0, const MeanFieldParams& p, double x_tol,
                               double t_max, const IntegratorOptions& options) {
  validate(p);
  const std::size_t K = p.K();
  const Vector flat = y0.flat();
  check_domain(flat, K);
  auto settled = [K, x_tol](const Vector& y) {
    double xi = 0.0, ii = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      ii += std::abs(y[K + k]);
      xi += std::abs(y[2 * K + k]);
    }
    return xi < x_tol && ii < x_tol;
  };
  auto frozen = [K](const Vector& y) {
    OdeState st = OdeState::from_flat(y);
    st.i.assign(K, 0.0);
    st.x.assign(K, 0.0);
    return st;
  };
  SteadyStateResult res;
  if (settled(flat)) {
    res.state = frozen(flat);
    return res;
  }
  Rhs f = [&p](double, std::span<const double> y, std::span<double> dy) {
    vector_field_into(p, y, dy);
  };
  Dopri5 solver(f, flat, 0.0, options);
  while (!settled(solver.y())) {
    if (solver.t() >= t_max)
      throw Error(ErrorCode::HorizonExceeded,
                  "no steady state before t=" + std::to_string(t_max));
    solver.step(t_max);
  }
  res.state = frozen(solver.y());
  res.t = solver.t();
  res.stats = solver.stats();
  return res;
}

std::vector<double> peak_times(const OdeTrajectory& traj, const MeanFieldParams& p,
                               std::size_t index) {
  std::vector<double> peaks;
  const std::size_t n = traj.t.size();
  if (n < 2) return peaks;
  std::vector<double> d(n);
  Vector dy(traj.y.front().size());
  for (std::size_t j = 0; j < n; ++j) {
    vector_field_into(p, traj.y[j], dy);
    d[j] = dy[index];
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(d[j] > 0.0 && d[j + 1] <= 0.0)) continue;
    const double h = traj.t[j + 1] - traj.t[j];
    const double ya = traj.y[j][index], yb = traj.y[j + 1][index];
    const double da = d[j], db = d[j + 1];
    // Derivative of the cubic Hermite interpolant in tau in [0, 1].
    const double A = 6.0 * (ya - yb) / h + 3.0 * da + 3.0 * db;
    const double B = -6.0 * (ya - yb) / h - 4.0 * da - 2.0 * db;
    const double C = da;
    auto slope = [&](double tau) { return (A * tau + B) * tau + C; };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    peaks.push_back(traj.t[j] + 0.5 * (lo + hi) * h);
  }
  return peaks;
}

std::optional<double> first_down_crossing(const std::vector<double>& t,
                                          const std::vector<double>& v, double level) {
  if (t.size() != v.size() || t.empty() || !(v.front() > level)) return std::nullopt;
  // The series is monotone in the intended use; bisection finds the bracket.
  if (!(v.back() <= level)) return std::nullopt;
  std::size_t lo = 0, hi = v.size() - 1;  // v[lo] > level >= v[hi]
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (v[mid] > level ? lo : hi) = mid;
  }
  const double frac = (v[lo] - level) / (v[lo] - v[hi]);
  return t[lo] + frac * (t[hi] - t[lo]);
}

Vector pair_approx_field(const Vector& state, const MeanFieldParams& p) {
  const std::size_t K = p.K();
  if (state.size() != 3 * K) throw Error(ErrorCode::InvalidArgument, "state must have length 3K");
  Vector d(3 * K);
  const double eta = p.eta, gamma = p.gamma;
  for (std::size_t k = 0; k < K; ++k) {
    const double s = state[k];
    if (!(s > kSingularS))
      throw Error(ErrorCode::SingularS, "s_" + std::to_string(k + 1) + " too close to zero");
    const double y = state[2 * K + k];
    double inflow = 0.0;
    for (std::size_t l = 0; l < K; ++l) inflow += state[2 * K + l] * p.W(l, k);
    d[k] = -eta * y;
    d[K + k] = eta * y - gamma * state[K + k];
    d[2 * K + k] = -(eta + gamma) * y + eta * inflow * s - eta / s * y * y;
  }
  return d;
}

Vector pair_approx_initial(const OdeState& y0, const MeanFieldParams& p) {
  const Vector F = force_of_infection(y0.flat(), p);
  const std::size_t K = p.K();
  Vector out(3 * K);
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = y0.s[k];
    out[K + k] = y0.i[k];
    out[2 * K + k] = y0.s[k] * F[k] / p.eta;
  }
  return out;
}

OdeTrajectory integrate_pair_approx(const Vector& state0, const MeanFieldParams& p,
                                    const std::vector<double>& grid,
                                    const IntegratorOptions& options) {
  validate(p);
  check_grid(grid);
  pair_approx_field(state0, p);
  Rhs f = [&p](double, std::span<const double> y, std::span<double> dy) {
    const Vector d = pair_approx_field(Vector(y.begin(), y.end()), p);
    std::copy(d.begin(), d.end(), dy.begin());
  };
  return from_grid_solution(integrate_on_grid(f, state0, 0.0, grid, options));
}

HeteroParams HeteroParams::homogeneous(std::size_t K, double eta, double gamma) {
  return {Matrix(K, K, eta), Vector(K, gamma)};
}

void validate(const HeteroParams& h, std::size_t K) {
  if (h.eta.rows() != K || h.eta.cols() != K || h.gamma.size() != K)
    throw Error(ErrorCode::InvalidArgument, "rate shapes must match K");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(h.gamma[k] > 0.0)) throw Error(ErrorCode::NonPositiveRate, "gamma_k must be positive");
    for (std::size_t l = 0; l < K; ++l)
      if (!(h.eta(k, l) > 0.0)) throw Error(ErrorCode::NonPositiveRate, "eta_kl must be positive");
  }
}

namespace {

void hetero_into(const Matrix& W, const HeteroParams& h, std::span<const double> st,
                 std::span<double> d) {
  const std::size_t K = W.rows();
  const double* x = st.data() + 2 * K;
  for (std::size_t k = 0; k < K; ++k) {
    double pressure = 0.0;
    for (std::size_t j = 0; j < K; ++j) pressure += h.eta(j, k) * W(j, k) * x[j * K + k];
    const double ds = -st[k] * pressure;
    d[k] = ds;
    d[K + k] = -h.gamma[k] * st[K + k] - ds;
    for (std::size_t l = 0; l < K; ++l)
      d[2 * K + k * K + l] = -(h.eta(k, l) + h.gamma[k]) * x[k * K + l] - ds;
  }
}

}  // namespace

Vector hetero_vector_field(const Vector& state, const Matrix& W, const HeteroParams& h) {
  const std::size_t K = W.rows();
  validate(h, K);
  if (state.size() != 2 * K + K * K)
    throw Error(ErrorCode::InvalidArgument, "state must have length 2K + K^2");
  Vector d(state.size());
  hetero_into(W, h, state, d);
  return d;
}

Vector hetero_initial(const Vector& s0, const Vector& i0) {
  const std::size_t K = s0.size();
  Vector out;
  out.reserve(2 * K + K * K);
  out.insert(out.end(), s0.begin(), s0.end());
  out.insert(out.end(), i0.begin(), i0.end());
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) out.push_back(i0[k]);
  return out;
}

OdeTrajectory integrate_hetero(const Vector& state0, const Matrix& W, const HeteroParams& h,
                               const std::vector<double>& grid,
                               const IntegratorOptions& options) {
  hetero_vector_field(state0, W, h);
  check_grid(grid);
  Rhs f = [&W, &h](double, std::span<const double> y, std::span<double> dy) {
    hetero_into(W, h, y, dy);
  };
  return from_grid_solution(integrate_on_grid(f, state0, 0.0, grid, options));
}

Matrix hetero_next_generation(const Vector& s, const Matrix& W, const HeteroParams& h) {
  const std::size_t K = W.rows();
  Matrix C(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      C(k, l) = h.eta(k, l) / (h.eta(k, l) + h.gamma[k]) * W(k, l) * s[l];
  return C;
}

std::vector<double> uniform_grid(double t_end, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {0.0};
  std::vector<double> g(points);
  for (std::size_t j = 0; j < points; ++j)
    g[j] = t_end * static_cast<double>(j) / static_cast<double>(points - 1);
  return g;
}

}  // namespace sbmsir
