#include "sbmsir/spectral.hpp"

#include <cmath>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {

double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(Vector& v) {
  const double n = norm2(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

// Power iteration on C + sigma I from the all-ones vector. The shift
// (max row sum) keeps the Perron root strictly dominant for periodic C.
// With symmetric C the estimate is the Rayleigh quotient; otherwise the
// l1 growth ratio of the (non-negative) iterate.
SpectralReport power_iteration(const Matrix& C, bool symmetric, double tol,
                               std::int64_t max_iter) {
  const std::size_t K = C.rows();
  if (K == 0 || C.cols() != K) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      if (!(C(i, j) >= 0.0) || !std::isfinite(C(i, j)))
        throw Error(ErrorCode::InvalidArgument, "matrix must be finite and non-negative");

  SpectralReport rep;
  const double sigma = C.inf_norm();
  if (sigma == 0.0) {
    rep.eigvec.assign(K, 1.0 / std::sqrt(static_cast<double>(K)));
    return rep;
  }
  Vector v(K, 1.0);
  normalize(v);
  double prev = -1.0;
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    Vector w = C * v;
    double lambda;
    if (symmetric) {
      lambda = 0.0;
      for (std::size_t i = 0; i < K; ++i) lambda += v[i] * w[i];
    } else {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        num += w[i];
        den += v[i];
      }
      lambda = num / den;
    }
    double resid = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double r = w[i] - lambda * v[i];
      resid += r * r;
    }
    resid = std::sqrt(resid);
    const double scale = std::max(1.0, std::abs(lambda));
    if (std::abs(lambda - prev) < tol * scale && resid < tol * scale) {
      rep.value = std::max(0.0, lambda);
      rep.eigvec = v;
      rep.iterations = it;
      return rep;
    }
    prev = lambda;
    for (std::size_t i = 0; i < K; ++i) w[i] += sigma * v[i];
    normalize(w);
    v.swap(w);
  }
  throw Error(ErrorCode::NoConvergence,
              "power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

bool is_symmetric(const Matrix& C) {
  for (std::size_t i = 0; i < C.rows(); ++i)
    for (std::size_t j = i + 1; j < C.cols(); ++j)
      if (C(i, j) != C(j, i)) return false;
  return true;
}

}  // namespace

SpectralReport spectral_radius(const Matrix& C, double tol, std::int64_t max_iter) {
  return power_iteration(C, is_symmetric(C), tol, max_iter);
}

SpectralReport product_form_radius(const Matrix& W, const Vector& s, double c, double tol,
                                   std::int64_t max_iter) {
  const std::size_t K = W.rows();
  if (s.size() != K) throw Error(ErrorCode::InvalidArgument, "s must have length K");
  Vector root(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(s[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "s must be non-negative");
    root[k] = std::sqrt(s[k]);
  }
  Matrix B(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) B(k, l) = c * root[k] * W(k, l) * root[l];
  // Symmetrize exactly so the Rayleigh path applies despite rounding.
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k + 1; l < K; ++l) B(l, k) = B(k, l);
  SpectralReport rep = power_iteration(B, true, tol, max_iter);

  // B u = lambda u  implies  (c W diag(s)) (c W diag(sqrt s) u) = lambda (c W diag(sqrt s) u).
  if (rep.value > 0.0) {
    Vector v(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < K; ++l) v[k] += c * W(k, l) * root[l] * rep.eigvec[l];
    normalize(v);
    rep.eigvec = v;
  }
  return rep;
}

}  // namespace sbmsir
