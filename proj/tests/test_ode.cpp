#include <algorithm>
#include <cmath>

#include "sbmsir/final_size.hpp"
#include "sbmsir/integrator.hpp"
#include "sbmsir/ode.hpp"
#include "sbmsir/rng.hpp"
#include "sbmsir/spectral.hpp"
#include "test_util.hpp"

using namespace sbmsir;

namespace {

MeanFieldParams two_block() { return {Matrix{{5, 1}, {1, 10}}, 0.5, 0.5}; }

OdeState seeded(const Vector& rho, const Vector& eps) {
  Vector s(rho.size()), i(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    i[k] = eps[k] * rho[k];
    s[k] = rho[k] - i[k];
  }
  return OdeState::with_x_equal_i(s, i);
}

// Random irreducible symmetric parameters and a U0 start with x = i.
std::pair<MeanFieldParams, OdeState> random_case(Rng& rng) {
  const std::size_t K = 1 + uniform_index(rng, 4);
  Matrix W(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k; l < K; ++l) W(k, l) = W(l, k) = 0.2 + 8.0 * uniform01(rng);
  Vector rho(K), eps(K);
  double total = 0.0;
  for (auto& r : rho) total += (r = 0.2 + uniform01(rng));
  for (std::size_t k = 0; k < K; ++k) {
    rho[k] /= total;
    eps[k] = 0.001 + 0.05 * uniform01(rng);
  }
  return {MeanFieldParams{W, 0.2 + uniform01(rng), 0.2 + uniform01(rng)}, seeded(rho, eps)};
}

double sup_diff(const Vector& a, const Vector& b, std::size_t from, std::size_t to) {
  double d = 0.0;
  for (std::size_t j = from; j < to; ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

// Cumulative trapezoid of v over t.
std::vector<double> cumulative(const std::vector<double>& t, const std::vector<double>& v) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t j = 1; j < t.size(); ++j) out[j] = out[j - 1] + 0.5 * (t[j] - t[j - 1]) * (v[j] + v[j - 1]);
  return out;
}

}  // namespace

TEST_CASE("vector field by hand") {
  // s + i = 1.01 sits just outside U0, so use the unchecked field.
  const MeanFieldParams p{Matrix{{4}}, 0.5, 0.5};
  Vector d(3);
  const Vector y{1.0, 0.01, 0.01};
  vector_field_into(p, y, d);
  CHECK(d[0] == doctest::Approx(-0.02).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(d[2] == doctest::Approx(0.01).epsilon(1e-14));

  const Vector z = vector_field({0.4, 0.2, 0.3, 0.1, 0.0, 0.0}, two_block());
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == doctest::Approx(-0.5 * 0.3));
  CHECK(z[3] == doctest::Approx(-0.5 * 0.1));
  CHECK(z[4] == 0.0);
  CHECK(z[5] == 0.0);
}

TEST_CASE("domain checks") {
  CHECK(in_domain({0.5, 0.5, 0.5}, 1));
  CHECK_FALSE(in_domain({0.7, 0.5, 0.1}, 1));
  CHECK_FALSE(in_domain({0.5, 0.1, 1.6}, 1));
  CHECK_FALSE(in_domain({-1e-9, 0.1, 0.1}, 1));
  CHECK(in_domain({-1e-11, 0.1, 0.1}, 1));
  CHECK_ERROR_CODE(vector_field({0.7, 0.5, 0.1}, MeanFieldParams{Matrix{{4}}, 1, 1}), ErrorCode::OutOfDomain);
  CHECK_ERROR_CODE(integrate(OdeState{{0.9}, {0.2}, {0.2}}, MeanFieldParams{Matrix{{4}}, 1, 1}, {0, 1}),
                   ErrorCode::OutOfDomain);
}

TEST_CASE("dopri5 dense output on exponential decay") {
  const Rhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
  const auto grid = uniform_grid(10.0, 101);
  const GridSolution sol = integrate_on_grid(f, {1.0}, 0.0, grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(std::abs(sol.y[j][0] - std::exp(-grid[j])) < 1e-9 * std::exp(-grid[j]) + 1e-12);
  CHECK(sol.stats.steps < 200);
}

TEST_CASE("dopri5 on a harmonic oscillator") {
  IntegratorOptions opt;
  opt.nonnegative = false;
  const Rhs f = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const auto grid = uniform_grid(20.0, 41);
  const GridSolution sol = integrate_on_grid(f, {1.0, 0.0}, 0.0, grid, opt);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(std::abs(sol.y[j][0] - std::cos(grid[j])) < 1e-7);
    CHECK(std::abs(sol.y[j][1] + std::sin(grid[j])) < 1e-7);
  }
}

TEST_CASE("dopri5 reports blow-up as step size underflow") {
  const Rhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  CHECK_ERROR_CODE(integrate_on_grid(f, {1.0}, 0.0, {0.5, 2.0}), ErrorCode::StepSizeUnderflow);
}

TEST_CASE("dopri5 clamps tiny undershoot and rejects real negatives") {
  const Rhs f = [](double, std::span<const double>, std::span<double> dy) { dy[0] = -1.0; };
  CHECK_ERROR_CODE(integrate_on_grid(f, {0.5}, 0.0, {1.0}), ErrorCode::OutOfDomain);
}

TEST_CASE("constant trajectory without infection") {
  const OdeState y0{{0.6, 0.4}, {0, 0}, {0, 0}};
  const OdeTrajectory tr = integrate(y0, two_block(), uniform_grid(10, 11));
  for (const auto& y : tr.y) CHECK(y == y0.flat());
  const SteadyStateResult ss = steady_state(y0, two_block());
  CHECK(ss.t == 0.0);
  CHECK(ss.state == y0);
}

TEST_CASE("finite difference consistency with the field") {
  const MeanFieldParams p = two_block();
  const OdeState y0 = seeded({0.5, 0.5}, {0.01, 0.0});
  const double h = 1e-6;
  const OdeTrajectory tr = integrate(y0, p, {0.0, h});
  const Vector b = vector_field(y0.flat(), p);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(b[j] - (tr.y[1][j] - tr.y[0][j]) / h) < 1e-4);
}

TEST_CASE("property: domain, monotonicity, conservation, x below i") {
  Rng rng = make_rng(3);
  const auto grid = uniform_grid(30.0, 3001);
  for (int trial = 0; trial < 30; ++trial) {
    const auto [p, y0] = random_case(rng);
    const std::size_t K = p.K();
    const OdeTrajectory tr = integrate(y0, p, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(in_domain(tr.y[j], K));
      if (j == 0) continue;
      for (std::size_t k = 0; k < K; ++k) {
        const auto& a = tr.y[j - 1];
        const auto& b = tr.y[j];
        // Monotone up to the integrator tolerance.
        CHECK(b[k] <= a[k] + 1e-10);
        CHECK(b[k] + b[K + k] <= a[k] + a[K + k] + 1e-10);
        CHECK(b[k] + b[2 * K + k] <= a[k] + a[2 * K + k] + 1e-10);
        // Below the absolute tolerance the clamp may legitimately produce 0.
        if (b[K + k] > 1e-9) {
          CHECK(b[2 * K + k] < b[K + k]);
          CHECK(b[2 * K + k] > 0.0);
        }
      }
    }
    // s + x + (eta+gamma) int x is constant.
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> x(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) x[j] = tr.y[j][2 * K + k];
      const auto chi = cumulative(grid, x);
      const double c0 = tr.y[0][k] + x[0];
      for (std::size_t j = 0; j < grid.size(); ++j)
        CHECK(std::abs(tr.y[j][k] + x[j] + (p.eta + p.gamma) * chi[j] - c0) < 1e-5);
    }
  }
}

TEST_CASE("positivity spreads from one seeded community") {
  const MeanFieldParams p{Matrix{{4, 0.5, 0}, {0.5, 3, 0.5}, {0, 0.5, 5}}, 0.7, 0.4};
  const OdeState y0{{0.3, 0.3, 0.3}, {0.0, 0.0, 0.0}, {0.01, 0.0, 0.0}};
  const OdeTrajectory tr = integrate(y0, p, uniform_grid(20.0, 201));
  for (std::size_t j = 1; j < tr.t.size(); ++j)
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(tr.y[j][3 + k] > 0.0);
      CHECK(tr.y[j][6 + k] > 0.0);
    }
}

TEST_CASE("steady state") {
  SUBCASE("matches the fixed point") {
    const MeanFieldParams p{Matrix{{3}}, 1.0, 1.0};
    const OdeState y0 = OdeState::with_x_equal_i({0.99}, {0.01});
    const SteadyStateResult ss = steady_state(y0, p);
    const FinalSizeReport fs = solve_final_size(p, y0.s, y0.x);
    CHECK(std::abs(ss.state.s[0] - fs.s_inf[0]) < 1e-7);
    CHECK(ss.state.i[0] == 0.0);
    CHECK(ss.state.x[0] == 0.0);
  }
  SUBCASE("horizon exceeded") {
    CHECK_ERROR_CODE(steady_state(seeded({0.5, 0.5}, {0.01, 0}), two_block(), 1e-10, 1.0),
                     ErrorCode::HorizonExceeded);
  }
  SUBCASE("property: implicit equation residual and lower bound") {
    Rng rng = make_rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const auto [p, y0] = random_case(rng);
      const std::size_t K = p.K();
      const SteadyStateResult ss = steady_state(y0, p);
      const double c = p.eta / (p.eta + p.gamma);
      for (std::size_t k = 0; k < K; ++k) {
        double e = 0.0;
        for (std::size_t l = 0; l < K; ++l) e += p.W(l, k) * (y0.s[l] + y0.x[l] - ss.state.s[l]);
        CHECK(std::abs(ss.state.s[k] - y0.s[k] * std::exp(-c * e)) < 1e-7);
        CHECK(ss.state.s[k] >= y0.s[k] * std::exp(-p.eta * p.W.inf_norm() * 3.0 / (p.eta + p.gamma)));
      }
    }
  }
}

TEST_CASE("force of infection") {
  const MeanFieldParams p = two_block();
  CHECK(force_of_infection({0.4, 0.4, 0.1, 0.1, 0, 0}, p) == Vector{0.0, 0.0});
  const Vector y{0.45, 0.4, 0.05, 0.1, 0.03, 0.07};
  const Vector F = force_of_infection(y, p);
  const Vector b = vector_field(y, p);
  for (std::size_t k = 0; k < 2; ++k) CHECK(-b[k] / y[k] == doctest::Approx(F[k]).epsilon(1e-14));

  // dF/dt along a trajectory against (eta+gamma) F (C^T - 1), C = c W diag(s).
  const double h = 1e-6;
  const OdeTrajectory tr = integrate(OdeState::from_flat(y), p, {0.0, h});
  const Vector F1 = force_of_infection(tr.y[1], p);
  const Vector rate = force_of_infection_rate(y, p);
  const double c = p.eta / (p.eta + p.gamma);
  for (std::size_t k = 0; k < 2; ++k) {
    double FC = 0.0;
    for (std::size_t l = 0; l < 2; ++l) FC += F[l] * c * p.W(k, l) * y[l];
    const double expected = (p.eta + p.gamma) * (FC - F[k]);
    CHECK(rate[k] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs((F1[k] - F[k]) / h - expected) < 1e-4);
  }
}

TEST_CASE("pair approximation") {
  const MeanFieldParams p = two_block();
  SUBCASE("no edges: s frozen, i decays") {
    const Vector d = pair_approx_field({0.4, 0.5, 0.1, 0.0, 0.0, 0.0}, p);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == doctest::Approx(-0.05));
    CHECK(d[3] == 0.0);
  }
  SUBCASE("singular s") {
    CHECK_ERROR_CODE(pair_approx_field({0.0, 0.5, 0.1, 0.0, 0.0, 0.0}, p), ErrorCode::SingularS);
  }
  SUBCASE("reproduces the mean-field s and i") {
    const auto grid = uniform_grid(25.0, 251);
    for (const auto& [q, y0] :
         {std::pair{p, seeded({0.5, 0.5}, {0.01, 0.0})},
          std::pair{MeanFieldParams{Matrix{{3}}, 1.0, 1.0}, seeded({1.0}, {0.01})}}) {
      const std::size_t K = q.K();
      const OdeTrajectory a = integrate(y0, q, grid);
      const OdeTrajectory b = integrate_pair_approx(pair_approx_initial(y0, q), q, grid);
      double d = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) d = std::max(d, sup_diff(a.y[j], b.y[j], 0, 2 * K));
      CHECK(d < 1e-6);
    }
  }
}

TEST_CASE("heterogeneous rates") {
  const MeanFieldParams p = two_block();
  const OdeState y0 = seeded({0.5, 0.5}, {0.01, 0.0});
  const auto grid = uniform_grid(25.0, 251);
  SUBCASE("homogeneous reduction") {
    const HeteroParams h = HeteroParams::homogeneous(2, p.eta, p.gamma);
    const OdeTrajectory a = integrate(y0, p, grid);
    const OdeTrajectory b = integrate_hetero(hetero_initial(y0.s, y0.i), p.W, h, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(sup_diff(a.y[j], b.y[j], 0, 4) < 1e-8);
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) CHECK(std::abs(b.y[j][4 + 2 * k + l] - a.y[j][4 + k]) < 1e-8);
    }
  }
  SUBCASE("no active edges") {
    HeteroParams h{Matrix{{1, 2}, {2, 0.5}}, {0.3, 0.7}};
    const Vector d = hetero_vector_field({0.4, 0.4, 0.1, 0.1, 0, 0, 0, 0}, p.W, h);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == doctest::Approx(-0.03));
    CHECK(d[3] == doctest::Approx(-0.07));
  }
  SUBCASE("R_eff is non-increasing") {
    HeteroParams h{Matrix{{1, 2}, {0.5, 0.8}}, {0.3, 0.7}};
    const OdeTrajectory tr = integrate_hetero(hetero_initial(y0.s, y0.i), p.W, h, grid);
    double prev = INFINITY;
    for (const auto& y : tr.y) {
      const double r = spectral_radius(hetero_next_generation({y[0], y[1]}, p.W, h)).value;
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
  SUBCASE("validation") {
    CHECK_ERROR_CODE(validate(HeteroParams{Matrix{{1, 0}, {1, 1}}, {1, 1}}, 2), ErrorCode::NonPositiveRate);
    CHECK_ERROR_CODE(validate(HeteroParams{Matrix{{1, 1}, {1, 1}}, {1, -1}}, 2), ErrorCode::NonPositiveRate);
  }
}

TEST_CASE("peaks: i is still rising when x first peaks") {
  Rng rng = make_rng(9);
  const auto grid = uniform_grid(40.0, 801);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto [p, y0] = random_case(rng);
    const std::size_t K = p.K();
    const Vector b0 = vector_field(y0.flat(), p);
    const OdeTrajectory tr = integrate(y0, p, grid);
    for (std::size_t k = 0; k < K; ++k) {
      if (!(b0[2 * K + k] > 0.0)) continue;
      const auto xp = peak_times(tr, p, 2 * K + k);
      const auto ip = peak_times(tr, p, K + k);
      REQUIRE_FALSE(xp.empty());
      REQUIRE_FALSE(ip.empty());
      CHECK(ip.front() > xp.front());
      for (std::size_t j = 1; j < grid.size(); ++j) {
        const Vector b = vector_field(tr.y[j], p);
        if (b[2 * K + k] <= 0.0) {
          CHECK(b[K + k] > 0.0);
          break;
        }
      }
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("peak refinement is accurate for a known curve") {
  // i(t) for K = 1 near its peak, compared with a much finer grid.
  const MeanFieldParams p{Matrix{{4}}, 0.5, 0.5};
  const OdeState y0 = seeded({1.0}, {0.01});
  const auto coarse = integrate(y0, p, uniform_grid(30.0, 61));
  const auto fine = integrate(y0, p, uniform_grid(30.0, 300001));
  const auto pc = peak_times(coarse, p, 1);
  const auto pf = peak_times(fine, p, 1);
  REQUIRE(pc.size() == 1);
  REQUIRE(pf.size() == 1);
  CHECK(std::abs(pc[0] - pf[0]) < 1e-3);
}

TEST_CASE("first down crossing") {
  CHECK(*first_down_crossing({0, 1, 2, 3}, {3, 2, 1, 0}, 1.5) == doctest::Approx(1.5));
  CHECK_FALSE(first_down_crossing({0, 1}, {0.5, 0.2}, 1.0));
  CHECK_FALSE(first_down_crossing({0, 1}, {2.0, 1.5}, 1.0));
}

TEST_CASE("x decays at the predicted rate after herd immunity") {
  const MeanFieldParams p{Matrix{{3}}, 1.0, 1.0};
  const OdeState y0 = OdeState::with_x_equal_i({0.99}, {0.01});
  const auto grid = uniform_grid(60.0, 6001);
  const OdeTrajectory tr = integrate(y0, p, grid);
  const auto th = herd_immunity_time(tr, p);
  REQUIRE(th);
  const SteadyStateResult ss = steady_state(y0, p);
  const double lambda = herd_decay_rate(p, ss.state.s);

  // Least squares of log x on t over the tail past herd immunity.
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = tr.y[j][2];
    // Stay above the integrator's absolute noise floor.
    if (grid[j] < *th + 5.0 || x < 1e-10) continue;
    const double ly = std::log(x);
    n += 1;
    st += grid[j];
    sy += ly;
    stt += grid[j] * grid[j];
    sty += grid[j] * ly;
  }
  REQUIRE(n > 100);
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  CHECK(std::abs(-slope - lambda) < 0.1 * lambda);
}

TEST_CASE("uniform grid") {
  const auto g = uniform_grid(25.0, 200);
  CHECK(g.size() == 200);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 25.0);
}
