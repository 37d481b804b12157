#include "sbmsir/final_size.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

constexpr double kThresholdSlack = 1e-10;
constexpr double kMonotoneSlack = 1e-13;
constexpr double kMaxRateRatio = 1e6;

double inf_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_s0(const Vector& s0, std::size_t K) {
  if (s0.size() != K) throw Error(ErrorCode::InvalidArgument, "s0 must have length K");
  for (double v : s0)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "s0 must be non-negative");
}

// C_kl = c W_kl s0_l: the expected number of type-l offspring of a type-k node.
Matrix next_generation(const MeanFieldParams& p, const Vector& s0) {
  const std::size_t K = p.K();
  const double c = p.transmissibility();
  Matrix C(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) C(k, l) = c * p.W(k, l) * s0[l];
  return C;
}

SurvivalVector to_survival(FixedPointResult fp) {
  SurvivalVector out;
  out.q = std::move(fp.q);
  out.prob.resize(out.q.size());
  for (std::size_t k = 0; k < out.q.size(); ++k) out.prob[k] = 1.0 - out.q[k];
  out.iterations = fp.iterations;
  out.residual = fp.residual;
  return out;
}

SurvivalVector extinct_surely(std::size_t K) {
  SurvivalVector out;
  out.q.assign(K, 1.0);
  out.prob.assign(K, 0.0);
  return out;
}

}  // namespace

SpectralReport r0(const MeanFieldParams& p, const Vector& s0) {
  validate(p);
  check_s0(s0, p.K());
  return product_form_radius(p.W, s0, p.transmissibility());
}

std::vector<SpectralReport> reff_along(const OdeTrajectory& traj, const MeanFieldParams& p) {
  validate(p);
  const std::size_t K = p.K();
  std::vector<SpectralReport> out;
  out.reserve(traj.y.size());
  for (const auto& y : traj.y) {
    Vector s(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(K));
    for (double& v : s) v = std::max(v, 0.0);
    out.push_back(product_form_radius(p.W, s, p.transmissibility()));
  }
  return out;
}

std::optional<double> herd_immunity_time(const OdeTrajectory& traj, const MeanFieldParams& p) {
  const auto series = reff_along(traj, p);
  std::vector<double> v;
  v.reserve(series.size());
  for (const auto& r : series) v.push_back(r.value);
  return first_down_crossing(traj.t, v, 1.0);
}

double herd_decay_rate(const MeanFieldParams& p, const Vector& s_inf) {
  return (p.eta + p.gamma) * (1.0 - r0(p, s_inf).value);
}

FixedPointResult monotone_fixed_point(const std::function<Vector(const Vector&)>& F,
                                      std::size_t K, double tol, std::int64_t max_iter) {
  Vector q(K, 0.0);
  Vector prev1;  // q_{m-1}
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    Vector next = F(q);
    for (std::size_t k = 0; k < K; ++k) {
      if (next[k] < q[k] - kMonotoneSlack || next[k] > 1.0 + kMonotoneSlack)
        throw std::logic_error("fixed-point iterate left the monotone path");
      next[k] = std::clamp(next[k], q[k], 1.0);
    }
    const double step = inf_diff(next, q);
    if (step < tol) return {next, it, inf_diff(next, F(next))};

    if (it > kAitkenAfter && !prev1.empty()) {
      // Delta-squared on (q_{m-1}, q_m, q_{m+1}).
      Vector cand(K);
      bool ok = true;
      for (std::size_t k = 0; k < K && ok; ++k) {
        const double d1 = q[k] - prev1[k], d2 = next[k] - q[k];
        const double denom = d2 - d1;
        cand[k] = (denom != 0.0 && d2 != 0.0) ? next[k] - d2 * d2 / denom : next[k];
        ok = std::isfinite(cand[k]) && cand[k] >= next[k] && cand[k] < 1.0;
      }
      if (ok) {
        const Vector image = F(cand);
        bool below = true;
        for (std::size_t k = 0; k < K; ++k) below = below && image[k] >= cand[k];
        if (below) next = cand;
      }
    }
    prev1 = std::move(q);
    q = std::move(next);
  }
  throw Error(ErrorCode::NoConvergence,
              "fixed point not reached in " + std::to_string(max_iter) + " iterations");
}

FinalSizeReport solve_final_size(const MeanFieldParams& p, const Vector& s0, const Vector& x0,
                                 double tol) {
  validate(p);
  const std::size_t K = p.K();
  check_s0(s0, K);
  if (x0.size() != K) throw Error(ErrorCode::InvalidArgument, "x0 must have length K");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(s0[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "s0 must be positive");
    if (!(x0[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "x0 must be non-negative");
  }
  const double c = p.transmissibility();
  const Matrix C = next_generation(p, s0);
  Vector a(K, 0.0);
  double a_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < K; ++l) a[k] += c * p.W(l, k) * x0[l];
    a_total += a[k];
  }

  FinalSizeReport rep;
  rep.r0 = r0(p, s0).value;
  if (a_total == 0.0) {
    rep.q.assign(K, 1.0);
    rep.degenerate = rep.r0 > 1.0 + kThresholdSlack;
  } else {
    auto F = [&](const Vector& q) {
      Vector out(K);
      for (std::size_t k = 0; k < K; ++k) {
        double e = 0.0;
        for (std::size_t l = 0; l < K; ++l) e += C(k, l) * (1.0 - q[l]);
        out[k] = std::exp(-a[k] - e);
      }
      return out;
    };
    const FixedPointResult fp = monotone_fixed_point(F, K, tol);
    rep.q = fp.q;
    rep.iterations = fp.iterations;
    rep.residual = fp.residual;
  }
  rep.s_inf.resize(K);
  rep.attack.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    rep.s_inf[k] = rep.q[k] * s0[k];
    rep.attack[k] = s0[k] - rep.s_inf[k];
  }
  return rep;
}

SurvivalVector survival_backward(const MeanFieldParams& p, const Vector& s0, double tol) {
  validate(p);
  const std::size_t K = p.K();
  check_s0(s0, K);
  if (r0(p, s0).value <= 1.0 + kThresholdSlack) return extinct_surely(K);
  const Matrix C = next_generation(p, s0);
  auto F = [&](const Vector& q) {
    Vector out(K);
    for (std::size_t k = 0; k < K; ++k) {
      double e = 0.0;
      for (std::size_t l = 0; l < K; ++l) e += C(k, l) * (q[l] - 1.0);
      out[k] = std::exp(e);
    }
    return out;
  };
  return to_survival(monotone_fixed_point(F, K, tol));
}

SurvivalVector survival_forward(const MeanFieldParams& p, const Vector& s0, int quadrature_nodes,
                                double tol) {
  validate(p);
  const std::size_t K = p.K();
  check_s0(s0, K);
  const double ratio = p.eta / p.gamma;
  if (ratio > kMaxRateRatio)
    throw Error(ErrorCode::QuadratureUnstable, "eta/gamma too large for Gauss-Laguerre");
  if (r0(p, s0).value <= 1.0 + kThresholdSlack) return extinct_surely(K);

  Matrix M(K, K);
  double m_max = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double row = 0.0;
    for (std::size_t l = 0; l < K; ++l) row += (M(k, l) = p.W(k, l) * s0[l]);
    m_max = std::max(m_max, row);
  }

  // Laguerre rule in v with gamma T = kappa v, plus the leftover mass at
  // T = inf (p_T = 1). The integrand minus its limit decays like
  // exp(-(eta + gamma) T), hence the 1/(1 + eta/gamma); the square root
  // spreads the nodes over the exp(-j eta T) components that carry weight.
  const GaussLaguerre& rule = gauss_laguerre(quadrature_nodes);
  const double rho = ratio / (1.0 + ratio);
  const double kappa = 1.0 / ((1.0 + ratio) * std::sqrt(1.0 + m_max * rho));
  std::vector<double> transmit(rule.nodes.size()), weight(rule.nodes.size());
  double tail = 1.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    transmit[j] = -std::expm1(-ratio * kappa * rule.nodes[j]);  // p_T = 1 - exp(-eta T)
    weight[j] = std::exp(std::log(rule.weights[j]) + std::log(kappa) + (1.0 - kappa) * rule.nodes[j]);
    if (!std::isfinite(weight[j]))
      throw Error(ErrorCode::QuadratureUnstable, "rescaled Laguerre weight overflowed");
    tail -= weight[j];
  }

  auto F = [&](const Vector& q) {
    Vector out(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      double m = 0.0;
      for (std::size_t l = 0; l < K; ++l) m += M(k, l) * (1.0 - q[l]);
      double acc = tail * std::exp(-m);
      for (std::size_t j = 0; j < transmit.size(); ++j)
        acc += weight[j] * std::exp(-transmit[j] * m);
      out[k] = std::min(acc, 1.0);
    }
    return out;
  };
  return to_survival(monotone_fixed_point(F, K, tol));
}

SurvivalReport survival_report(const MeanFieldParams& p, const Vector& s0, int quadrature_nodes) {
  SurvivalReport rep;
  rep.pi = survival_forward(p, s0, quadrature_nodes).prob;
  rep.theta = survival_backward(p, s0).prob;
  rep.r0 = r0(p, s0).value;
  rep.quadrature_nodes = quadrature_nodes;
  rep.method = "monotone fixed point from q=0; forward expectation by Gauss-Laguerre";
  return rep;
}

double outbreak_probability(const Vector& pi, const Counts& I0) {
  if (pi.size() != I0.size()) throw Error(ErrorCode::InvalidArgument, "pi and I0 lengths differ");
  double log_none = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (!(pi[k] >= 0.0 && pi[k] < 1.0)) throw Error(ErrorCode::InvalidArgument, "pi_k must lie in [0, 1)");
    if (I0[k] < 0) throw Error(ErrorCode::InvalidArgument, "I0 must be non-negative");
    log_none += static_cast<double>(I0[k]) * std::log1p(-pi[k]);
  }
  return -std::expm1(log_none);
}

}  // namespace sbmsir
