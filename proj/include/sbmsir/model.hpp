#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace sbmsir {

using Vector = std::vector<double>;

// Small dense row-major matrix. K is the number of communities, so these
// stay tiny; no expression templates needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t k);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double max_entry() const;
  // Maximum absolute row sum.
  double inf_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(double alpha, const Matrix& m);
Vector operator*(const Matrix& m, const Vector& v);

struct ModelParams {
  std::size_t K = 0;
  Matrix W;
  std::vector<std::int64_t> community_sizes;
  double eta = 0.0;
  double gamma = 0.0;

  std::int64_t n() const;
};

// Throws sbmsir::Error with ZeroRow, AsymmetricW, NTooSmall, NonPositiveRate
// or InvalidArgument (shape mismatches).
void validate(const ModelParams& params);

Vector mean_degrees(const ModelParams& params);
Matrix community_transition(const ModelParams& params);
Matrix coupling_affinity(const ModelParams& params);

// What the deterministic limit needs: affinity and rates, no sizes.
struct MeanFieldParams {
  Matrix W;
  double eta = 0.0;
  double gamma = 0.0;

  std::size_t K() const noexcept { return W.rows(); }
  // eta / (eta + gamma)
  double transmissibility() const noexcept { return eta / (eta + gamma); }
  static MeanFieldParams from(const ModelParams& p) { return {p.W, p.eta, p.gamma}; }
};

// Square, finite, non-negative, symmetric W and positive rates.
void validate(const MeanFieldParams& params);

struct DerivedQuantities {
  Vector D;       // mean degree per community
  Matrix P;       // p_{k->l}, row-stochastic
  Matrix Wprime;  // affinity of the PSBM that conditions to SBM(W)
  Vector rho;     // n_k / n
};

// Validated parameters plus the derived quantities, computed once.
// Immutable; share freely between threads.
class Model {
 public:
  explicit Model(ModelParams params);

  const ModelParams& params() const noexcept { return params_; }
  const DerivedQuantities& derived() const noexcept { return derived_; }

  std::size_t K() const noexcept { return params_.K; }
  std::int64_t n() const noexcept { return n_; }
  double eta() const noexcept { return params_.eta; }
  double gamma() const noexcept { return params_.gamma; }
  const Matrix& W() const noexcept { return params_.W; }
  std::int64_t size(std::size_t k) const { return params_.community_sizes[k]; }
  // First vertex id of community k; vertices are labeled in contiguous blocks.
  std::int64_t offset(std::size_t k) const { return offsets_[k]; }
  std::size_t label_of(std::int64_t v) const;

 private:
  ModelParams params_;
  DerivedQuantities derived_;
  std::int64_t n_ = 0;
  std::vector<std::int64_t> offsets_;
};

}  // namespace sbmsir
