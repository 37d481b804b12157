#pragma once

#include <cstdint>

#include "sbmsir/model.hpp"

namespace sbmsir {

struct SpectralReport {
  double value = 0.0;   // spectral radius
  Vector eigvec;        // Perron right eigenvector, L2-normalized
  std::int64_t iterations = 0;
};

inline constexpr double kSpectralTol = 1e-12;
inline constexpr std::int64_t kSpectralMaxIter = 100'000;

// Shifted power iteration for a non-negative matrix. Throws NoConvergence.
SpectralReport spectral_radius(const Matrix& C, double tol = kSpectralTol,
                               std::int64_t max_iter = kSpectralMaxIter);

// Radius of c * W * diag(s) for symmetric W and s >= 0, computed on the
// similar symmetric matrix c * sqrt(s_k) W_kl sqrt(s_l).
SpectralReport product_form_radius(const Matrix& W, const Vector& s, double c,
                                   double tol = kSpectralTol,
                                   std::int64_t max_iter = kSpectralMaxIter);

}  // namespace sbmsir
