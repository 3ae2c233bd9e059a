#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "badband/cube.hpp"
#include "badband/error.hpp"
#include "badband/parallel.hpp"

namespace badband {

/// Pixels per GEMM block in the covariance accumulation.
inline constexpr Eigen::Index kCovarianceBlock = 512;
/// Upper bound on independent partial sums. The partition depends only on N,
/// never on the thread count, so K is bit-identical for any --threads value.
inline constexpr Eigen::Index kCovariancePartials = 64;

/// Ridge escalation: first try, growth factor, last try (all relative to
/// trace(K)/L).
inline constexpr double kRidgeStart = 1e-8;
inline constexpr double kRidgeGrowth = 10.0;
inline constexpr double kRidgeLimit = 1e-2;

/// Background covariance and its Cholesky factor. If K itself could not be
/// factorized, the factor is that of K + ridge_applied * I.
class CovarianceModel {
 public:
  CovarianceModel(Matrix k, std::size_t samples) : k_(std::move(k)), samples_(samples) {
    if (k_.rows() != k_.cols()) throw DimensionError("covariance must be square");
    factorize();
  }

  [[nodiscard]] const Matrix& K() const noexcept { return k_; }
  [[nodiscard]] double ridge_applied() const noexcept { return ridge_; }
  [[nodiscard]] std::size_t samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t bands() const noexcept { return static_cast<std::size_t>(k_.rows()); }
  /// Lower-triangular factor F with F * F^T = K + ridge_applied * I.
  [[nodiscard]] Matrix factor() const { return llt_.matrixL(); }
  /// K + ridge_applied * I.
  [[nodiscard]] Matrix regularized() const {
    Matrix out = k_;
    out.diagonal().array() += ridge_;
    return out;
  }
  [[nodiscard]] const Eigen::LLT<Matrix>& llt() const noexcept { return llt_; }

 private:
  // A factorization counts as failed when Eigen reports a non-positive pivot
  // or the smallest squared pivot vanishes relative to the largest variance.
  static bool usable(const Eigen::LLT<Matrix>& llt, const Matrix& a) {
    if (llt.info() != Eigen::Success) return false;
    const Matrix l = llt.matrixL();
    const double min_pivot = l.diagonal().array().square().minCoeff();
    const double max_diag = a.diagonal().maxCoeff();
    return std::isfinite(min_pivot) &&
           min_pivot > static_cast<double>(a.rows()) * DBL_EPSILON * max_diag;
  }

  void factorize() {
    llt_.compute(k_);
    if (usable(llt_, k_)) return;
    const double trace = k_.trace();
    const double scale = trace > 0.0 ? trace / static_cast<double>(k_.rows()) : 1.0;
    for (double rel = kRidgeStart; rel <= kRidgeLimit * (1.0 + 1e-9); rel *= kRidgeGrowth) {
      const Matrix shifted = regularized_by(rel * scale);
      llt_.compute(shifted);
      if (usable(llt_, shifted)) {
        ridge_ = rel * scale;
        return;
      }
    }
    throw NumericError("covariance is singular even with ridge " +
                       std::to_string(kRidgeLimit) + " * trace/L");
  }

  [[nodiscard]] Matrix regularized_by(double ridge) const {
    Matrix out = k_;
    out.diagonal().array() += ridge;
    return out;
  }

  Matrix k_;
  std::size_t samples_;
  Eigen::LLT<Matrix> llt_;
  double ridge_ = 0.0;
};

/// K = R R^T / N for an already centered cube, accumulated over fixed pixel
/// blocks and combined in block order.
inline CovarianceModel covariance(const HyperspectralCube& centered,
                                  const ExecutionOptions& exec = {}) {
  const BandMatrix& r = centered.data();
  const Eigen::Index L = r.rows();
  const Eigen::Index N = r.cols();

  for (Eigen::Index j = 0; j < L; ++j) {
    const double norm = r.row(j).norm();
    const double mean = r.row(j).sum() / static_cast<double>(N);
    if (std::abs(mean) > 1e-8 * norm + 1e-300)
      throw InputError("covariance expects a centered cube; band " + std::to_string(j + 1) +
                       " has mean " + std::to_string(mean));
  }

  const Eigen::Index blocks = (N + kCovarianceBlock - 1) / kCovarianceBlock;
  const Eigen::Index partials = std::min(blocks, kCovariancePartials);
  std::vector<Matrix> partial(static_cast<std::size_t>(partials));

  parallel_for(static_cast<std::size_t>(partials), exec, [&](std::size_t p) {
    const auto pi = static_cast<Eigen::Index>(p);
    const Eigen::Index first_block = blocks * pi / partials;
    const Eigen::Index last_block = blocks * (pi + 1) / partials;
    Matrix acc = Matrix::Zero(L, L);
    for (Eigen::Index b = first_block; b < last_block; ++b) {
      const Eigen::Index begin = b * kCovarianceBlock;
      const Eigen::Index width = std::min(kCovarianceBlock, N - begin);
      const auto block = r.middleCols(begin, width);
      acc.noalias() += block * block.transpose();
    }
    partial[p] = std::move(acc);
  });

  Matrix k = Matrix::Zero(L, L);
  for (const Matrix& p : partial) k += p;
  k = (0.5 * (k + k.transpose())).eval();
  k /= static_cast<double>(N);
  return CovarianceModel(std::move(k), static_cast<std::size_t>(N));
}

namespace detail {

/// b - (K + ridge I) x, accumulated in long double so that refinement can
/// push the residual below the working-precision floor of eps * cond.
inline Vector extended_residual(const CovarianceModel& model, const Vector& b, const Vector& x) {
  const Matrix& k = model.K();
  const long double ridge = model.ridge_applied();
  Vector r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    long double acc = static_cast<long double>(b[i]) - ridge * x[i];
    for (Eigen::Index j = 0; j < b.size(); ++j) acc -= static_cast<long double>(k(i, j)) * x[j];
    r[i] = static_cast<double>(acc);
  }
  return r;
}

}  // namespace detail

/// Solves (K + ridge I) x = b with two steps of iterative refinement.
inline Vector spd_solve(const CovarianceModel& model, const Vector& b) {
  if (static_cast<std::size_t>(b.size()) != model.bands())
    throw DimensionError("right-hand side has " + std::to_string(b.size()) +
                         " entries for a " + std::to_string(model.bands()) + "-band model");
  if (!b.allFinite()) throw InputError("spd_solve: right-hand side is not finite");
  Vector x = model.llt().solve(b);
  for (int step = 0; step < 2; ++step) x += model.llt().solve(detail::extended_residual(model, b, x));
  return x;
}

/// Linear transform of the band axis: either a positive diagonal (per-band
/// scaling) or a full invertible L x L matrix.
class BandTransform {
 public:
  static BandTransform diagonal(Vector scales) {
    if (!(scales.array() > 0.0).all() || !scales.allFinite())
      throw InputError("diagonal band transform needs finite positive entries");
    return BandTransform(std::move(scales));
  }

  static BandTransform full(Matrix a) {
    if (a.rows() != a.cols()) throw DimensionError("band transform must be square");
    if (!a.allFinite()) throw InputError("band transform is not finite");
    const Eigen::PartialPivLU<Matrix> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || !std::isfinite(1.0 / rcond))
      throw InputError("band transform is not invertible");
    return BandTransform(std::move(a));
  }

  [[nodiscard]] std::size_t bands() const noexcept {
    return std::visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); }, value_);
  }
  [[nodiscard]] bool is_diagonal() const noexcept { return std::holds_alternative<Vector>(value_); }
  [[nodiscard]] Matrix matrix() const {
    if (is_diagonal()) return std::get<Vector>(value_).asDiagonal();
    return std::get<Matrix>(value_);
  }
  [[nodiscard]] const Vector& diagonal_entries() const { return std::get<Vector>(value_); }

 private:
  explicit BandTransform(std::variant<Vector, Matrix> value) : value_(std::move(value)) {}
  std::variant<Vector, Matrix> value_;
};

/// R -> A R.
inline HyperspectralCube apply_band_transform(const HyperspectralCube& cube,
                                              const BandTransform& t) {
  if (t.bands() != cube.bands())
    throw DimensionError("transform is " + std::to_string(t.bands()) + "-band, cube has " +
                         std::to_string(cube.bands()));
  BandMatrix out;
  if (t.is_diagonal())
    out = t.diagonal_entries().asDiagonal() * cube.data();
  else
    out = t.matrix() * cube.data();
  return cube.with_data(std::move(out));
}

}  // namespace badband
