#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "badband/covariance.hpp"
#include "badband/cube.hpp"
#include "badband/error.hpp"

namespace badband {

/// How MF weights are turned into per-band significance.
///   NormWeighted  |w_j| * ||R_j||   (invariant to per-band rescaling; default)
///   PaperLiteral  |w_j| / ||R_j||   (constant bands map to 0)
enum class NmfConvention { NormWeighted, PaperLiteral };

constexpr std::string_view to_string(NmfConvention c) noexcept {
  return c == NmfConvention::NormWeighted ? "norm-weighted" : "paper-literal";
}

inline NmfConvention parse_convention(std::string_view text) {
  if (text == "norm-weighted") return NmfConvention::NormWeighted;
  if (text == "paper-literal") return NmfConvention::PaperLiteral;
  throw InputError("unknown convention '" + std::string(text) +
                   "' (expected norm-weighted or paper-literal)");
}

/// Matched filter for one target signature: w = kappa K^-1 (d - m) with
/// kappa = 1 / ((d - m)^T K^-1 (d - m)), so that w^T (d - m) = 1.
struct MfDetector {
  Vector weights;
  double kappa = 0.0;
  Vector target;
  Vector mean;

  [[nodiscard]] std::size_t bands() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

inline MfDetector mf_detector(const CovarianceModel& model, const Vector& mean, const Vector& target) {
  if (static_cast<std::size_t>(mean.size()) != model.bands() ||
      static_cast<std::size_t>(target.size()) != model.bands())
    throw DimensionError("mf_detector: mean/target length does not match the covariance");
  if (!mean.allFinite() || !target.allFinite())
    throw InputError("mf_detector: non-finite mean or target");

  const Vector diff = target - mean;
  const double scale = std::max(mean.norm(), target.norm());
  if (diff.norm() <= 1e-12 * scale || diff.norm() == 0.0)
    throw DegenerateTargetError("target signature coincides with the background mean");

  const Vector solved = spd_solve(model, diff);
  const double quad = diff.dot(solved);
  if (!(quad > 0.0) || !std::isfinite(quad))
    throw DegenerateTargetError("target quadratic form is not positive");

  const double kappa = 1.0 / quad;
  return MfDetector{kappa * solved, kappa, target, mean};
}

/// Detector output plane, one value per pixel.
struct MfOutput {
  Vector values;
  MfDetector detector;
};

/// Y = sum_j w_j R_j: the output as a weighted sum of band planes.
inline MfOutput mf_apply(const MfDetector& det, const HyperspectralCube& cube) {
  if (det.bands() != cube.bands())
    throw DimensionError("detector has " + std::to_string(det.bands()) + " bands, cube has " +
                         std::to_string(cube.bands()));
  Vector y = Vector::Zero(static_cast<Eigen::Index>(cube.pixels()));
  for (std::size_t j = 0; j < cube.bands(); ++j)
    y += det.weights[static_cast<Eigen::Index>(j)] * cube.data().row(static_cast<Eigen::Index>(j)).transpose();
  return MfOutput{std::move(y), det};
}

/// y_i = w^T r_i: the same output computed pixel by pixel.
inline MfOutput mf_apply_per_pixel(const MfDetector& det, const HyperspectralCube& cube) {
  if (det.bands() != cube.bands())
    throw DimensionError("detector has " + std::to_string(det.bands()) + " bands, cube has " +
                         std::to_string(cube.bands()));
  Vector y(static_cast<Eigen::Index>(cube.pixels()));
  for (std::size_t i = 0; i < cube.pixels(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    y[idx] = det.weights.dot(cube.data().col(idx));
  }
  return MfOutput{std::move(y), det};
}

struct NmfSignificance {
  Vector values;
  NmfConvention convention = NmfConvention::NormWeighted;
};

inline NmfSignificance nmf_significance(const MfDetector& det, const BandStats& stats,
                                        NmfConvention convention = NmfConvention::NormWeighted) {
  if (det.bands() != stats.bands())
    throw DimensionError("detector has " + std::to_string(det.bands()) + " bands, stats cover " +
                         std::to_string(stats.bands()));
  Vector values(det.weights.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double w = std::abs(det.weights[j]);
    const double norm = stats.centered_norms[j];
    if (convention == NmfConvention::NormWeighted)
      values[j] = w * norm;
    else
      values[j] = norm > 0.0 ? w / norm : 0.0;
  }
  return NmfSignificance{std::move(values), convention};
}

}  // namespace badband
