#include "sbmsir/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbmsir/error.hpp"

namespace sbmsir {

namespace {
constexpr double kSymmetryTol = 1e-12;
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error(ErrorCode::InvalidArgument, "ragged matrix literal");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t k) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::max_entry() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double Matrix::inf_norm() const {
  double best = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) sum += std::abs((*this)(r, c));
    best = std::max(best, sum);
  }
  return best;
}

Matrix operator*(double alpha, const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) *= alpha;
  return out;
}

Vector operator*(const Matrix& m, const Vector& v) {
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  return out;
}

std::int64_t ModelParams::n() const {
  std::int64_t total = 0;
  for (auto nk : community_sizes) total += nk;
  return total;
}

void validate(const ModelParams& p) {
  if (p.K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (p.W.rows() != p.K || p.W.cols() != p.K)
    throw Error(ErrorCode::InvalidArgument, "W must be K x K");
  if (p.community_sizes.size() != p.K)
    throw Error(ErrorCode::InvalidArgument, "sizes must have length K");
  for (std::size_t k = 0; k < p.K; ++k) {
    if (p.community_sizes[k] <= 0)
      throw Error(ErrorCode::InvalidArgument, "community size must be positive");
  }
  if (!(p.eta > 0.0) || !(p.gamma > 0.0) || !std::isfinite(p.eta) || !std::isfinite(p.gamma))
    throw Error(ErrorCode::NonPositiveRate, "eta and gamma must be positive");

  for (std::size_t k = 0; k < p.K; ++k) {
    for (std::size_t l = 0; l < p.K; ++l) {
      const double w = p.W(k, l);
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorCode::InvalidArgument, "W entries must be finite and non-negative");
      if (std::abs(w - p.W(l, k)) > kSymmetryTol)
        throw Error(ErrorCode::AsymmetricW, "W is not symmetric at (" + std::to_string(k) +
                                                "," + std::to_string(l) + ")");
    }
  }
  for (std::size_t k = 0; k < p.K; ++k) {
    bool positive = false;
    for (std::size_t l = 0; l < p.K; ++l) positive = positive || p.W(k, l) > 0.0;
    if (!positive) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(k + 1) + " of W is zero");
  }
  if (static_cast<double>(p.n()) <= p.W.max_entry())
    throw Error(ErrorCode::NTooSmall, "n must exceed max W entry");
}

void validate(const MeanFieldParams& p) {
  if (p.W.rows() == 0 || p.W.rows() != p.W.cols())
    throw Error(ErrorCode::InvalidArgument, "W must be square and non-empty");
  if (!(p.eta > 0.0) || !(p.gamma > 0.0) || !std::isfinite(p.eta) || !std::isfinite(p.gamma))
    throw Error(ErrorCode::NonPositiveRate, "eta and gamma must be positive");
  for (std::size_t k = 0; k < p.K(); ++k) {
    for (std::size_t l = 0; l < p.K(); ++l) {
      const double w = p.W(k, l);
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorCode::InvalidArgument, "W entries must be finite and non-negative");
      if (std::abs(w - p.W(l, k)) > kSymmetryTol)
        throw Error(ErrorCode::AsymmetricW, "W is not symmetric");
    }
  }
}

Vector mean_degrees(const ModelParams& p) {
  const double n = static_cast<double>(p.n());
  Vector D(p.K, 0.0);
  for (std::size_t k = 0; k < p.K; ++k)
    for (std::size_t l = 0; l < p.K; ++l)
      D[k] += p.W(k, l) * static_cast<double>(p.community_sizes[l]) / n;
  return D;
}

Matrix community_transition(const ModelParams& p) {
  const double n = static_cast<double>(p.n());
  const Vector D = mean_degrees(p);
  Matrix P(p.K, p.K);
  for (std::size_t k = 0; k < p.K; ++k)
    for (std::size_t l = 0; l < p.K; ++l)
      P(k, l) = p.W(k, l) * static_cast<double>(p.community_sizes[l]) / (n * D[k]);
  return P;
}

Matrix coupling_affinity(const ModelParams& p) {
  const double n = static_cast<double>(p.n());
  if (n <= p.W.max_entry()) throw Error(ErrorCode::NTooSmall, "n must exceed max W entry");
  Matrix Wp(p.K, p.K);
  for (std::size_t k = 0; k < p.K; ++k)
    for (std::size_t l = 0; l < p.K; ++l) Wp(k, l) = p.W(k, l) / (1.0 - p.W(k, l) / n);
  return Wp;
}

Model::Model(ModelParams params) : params_(std::move(params)) {
  validate(params_);
  n_ = params_.n();
  derived_.D = mean_degrees(params_);
  derived_.P = community_transition(params_);
  derived_.Wprime = coupling_affinity(params_);
  derived_.rho.resize(params_.K);
  offsets_.resize(params_.K);
  std::int64_t off = 0;
  for (std::size_t k = 0; k < params_.K; ++k) {
    derived_.rho[k] = static_cast<double>(params_.community_sizes[k]) / static_cast<double>(n_);
    offsets_[k] = off;
    off += params_.community_sizes[k];
  }
}

std::size_t Model::label_of(std::int64_t v) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), v);
  return static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
}

}  // namespace sbmsir
