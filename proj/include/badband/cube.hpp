#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "badband/error.hpp"
#include "badband/parallel.hpp"

namespace badband {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// L x N, one band plane per row, each row contiguous.
using BandMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      compensation_ += (sum_ - t) + x;
    else
      compensation_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// In-memory hyperspectral cube, stored band-major in double precision.
/// Pixel index i = line * samples + sample. Immutable after construction.
class HyperspectralCube {
 public:
  HyperspectralCube(std::size_t lines, std::size_t samples, BandMatrix data,
                    std::optional<std::vector<double>> wavelengths = std::nullopt,
                    std::optional<std::vector<std::string>> band_names = std::nullopt)
      : lines_(lines),
        samples_(samples),
        data_(std::move(data)),
        wavelengths_(std::move(wavelengths)),
        band_names_(std::move(band_names)) {
    if (lines_ == 0 || samples_ == 0 || data_.rows() == 0)
      throw InputError("cube must have at least one line, sample and band");
    if (static_cast<std::size_t>(data_.cols()) != lines_ * samples_)
      throw DimensionError("cube planes hold " + std::to_string(data_.cols()) +
                           " values, expected lines*samples = " +
                           std::to_string(lines_ * samples_));
    if (wavelengths_ && wavelengths_->size() != bands())
      throw DimensionError("wavelength list has " + std::to_string(wavelengths_->size()) +
                           " entries for " + std::to_string(bands()) + " bands");
    if (band_names_ && band_names_->size() != bands())
      throw DimensionError("band name list has " + std::to_string(band_names_->size()) +
                           " entries for " + std::to_string(bands()) + " bands");
    if (!data_.allFinite()) throw InputError("cube contains NaN or infinite values");
  }

  /// Builds a cube from a flat band-major buffer of bands*lines*samples values.
  static HyperspectralCube from_band_major(std::size_t lines, std::size_t samples,
                                           std::size_t bands, std::span<const double> values) {
    if (values.size() != lines * samples * bands)
      throw DimensionError("buffer holds " + std::to_string(values.size()) +
                           " values, expected " + std::to_string(lines * samples * bands));
    BandMatrix data(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(lines * samples));
    std::copy(values.begin(), values.end(), data.data());
    return HyperspectralCube(lines, samples, std::move(data));
  }

  [[nodiscard]] std::size_t lines() const noexcept { return lines_; }
  [[nodiscard]] std::size_t samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t bands() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  [[nodiscard]] std::size_t pixels() const noexcept { return lines_ * samples_; }

  [[nodiscard]] const BandMatrix& data() const noexcept { return data_; }
  [[nodiscard]] std::span<const double> band(std::size_t j) const {
    if (j >= bands()) throw InputError("band index " + std::to_string(j) + " out of range");
    return {data_.data() + j * pixels(), pixels()};
  }
  [[nodiscard]] const std::optional<std::vector<double>>& wavelengths() const noexcept {
    return wavelengths_;
  }
  [[nodiscard]] const std::optional<std::vector<std::string>>& band_names() const noexcept {
    return band_names_;
  }

  /// Same geometry and metadata, new values.
  [[nodiscard]] HyperspectralCube with_data(BandMatrix data) const {
    return HyperspectralCube(lines_, samples_, std::move(data), wavelengths_, band_names_);
  }

 private:
  std::size_t lines_;
  std::size_t samples_;
  BandMatrix data_;
  std::optional<std::vector<double>> wavelengths_;
  std::optional<std::vector<std::string>> band_names_;
};

/// Per-band first-order statistics. centered_norms is the diagonal of the
/// band normalization transform.
struct BandStats {
  Vector means;
  Vector centered_norms;
  Vector variances;
  std::vector<bool> constant_band_flags;

  [[nodiscard]] std::size_t bands() const noexcept { return static_cast<std::size_t>(means.size()); }
  [[nodiscard]] std::vector<std::size_t> constant_bands() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < constant_band_flags.size(); ++j)
      if (constant_band_flags[j]) out.push_back(j);
    return out;
  }
};

/// Means and Euclidean norms of the mean-removed bands. A band whose values
/// are all identical gets that value as its exact mean and a zero norm.
inline BandStats compute_band_stats(const HyperspectralCube& cube,
                                    const ExecutionOptions& exec = {}) {
  const std::size_t L = cube.bands();
  const auto n = static_cast<double>(cube.pixels());
  BandStats stats{Vector(L), Vector(L), Vector(L), std::vector<bool>(L)};
  std::vector<char> constant(L, 0);

  parallel_for(L, exec, [&](std::size_t j) {
    const auto plane = cube.band(j);
    const double first = plane.front();
    bool all_equal = true;
    CompensatedSum sum;
    for (double v : plane) {
      sum.add(v);
      all_equal = all_equal && v == first;
    }
    const double mean = all_equal ? first : sum.value() / n;
    CompensatedSum squares;
    for (double v : plane) {
      const double c = v - mean;
      squares.add(c * c);
    }
    const double ss = all_equal ? 0.0 : squares.value();
    stats.means[j] = mean;
    stats.centered_norms[j] = std::sqrt(ss);
    stats.variances[j] = ss / n;
    constant[j] = ss == 0.0;
  });
  for (std::size_t j = 0; j < L; ++j) stats.constant_band_flags[j] = constant[j] != 0;
  return stats;
}

/// Subtracts each band's mean from its plane.
inline HyperspectralCube centralize(const HyperspectralCube& cube, const BandStats& stats) {
  if (stats.bands() != cube.bands())
    throw DimensionError("band stats cover " + std::to_string(stats.bands()) +
                         " bands, cube has " + std::to_string(cube.bands()));
  BandMatrix centered = cube.data();
  centered.colwise() -= stats.means;
  return cube.with_data(std::move(centered));
}

/// The L values of one pixel, in band order.
inline Vector pixel_spectrum(const HyperspectralCube& cube, std::size_t index) {
  if (index >= cube.pixels())
    throw InputError("pixel index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(cube.pixels()) + ")");
  return cube.data().col(static_cast<Eigen::Index>(index));
}

/// Mean of several pixel spectra.
inline Vector mean_spectrum(const HyperspectralCube& cube, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InputError("mean_spectrum needs at least one pixel");
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(cube.bands()));
  for (std::size_t i : indices) acc += pixel_spectrum(cube, i);
  return acc / static_cast<double>(indices.size());
}

}  // namespace badband
