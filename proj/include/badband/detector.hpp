#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "badband/covariance.hpp"
#include "badband/cube.hpp"
#include "badband/error.hpp"
#include "badband/matched_filter.hpp"
#include "badband/parallel.hpp"
#include "badband/random.hpp"

namespace badband {

// ---------------------------------------------------------------------------
// Target sampling

/// Streams distinct pixel indices uniformly without replacement: a lazy
/// Fisher-Yates shuffle of [0, N) whose displaced slots live in a hash map,
/// so memory is O(draws) rather than O(N).
class TargetSampler {
 public:
  TargetSampler(std::size_t pixels, std::uint64_t seed) : pixels_(pixels), rng_(seed) {}

  [[nodiscard]] std::size_t remaining() const noexcept { return pixels_ - drawn_; }

  std::size_t next() {
    if (remaining() == 0) throw InputError("target sampler exhausted");
    const std::size_t pick = drawn_ + static_cast<std::size_t>(rng_.uniform_below(remaining()));
    const std::size_t value = slot(pick);
    swapped_[pick] = slot(drawn_);
    ++drawn_;
    return value;
  }

 private:
  [[nodiscard]] std::size_t slot(std::size_t i) const {
    const auto it = swapped_.find(i);
    return it == swapped_.end() ? i : it->second;
  }

  std::size_t pixels_;
  std::size_t drawn_ = 0;
  SplitMix64 rng_;
  std::unordered_map<std::size_t, std::size_t> swapped_;
};

struct TargetSample {
  std::vector<std::size_t> indices;
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

inline TargetSample sample_targets(std::size_t pixels, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InputError("number of targets must be at least 1");
  if (count > pixels)
    throw InputError("cannot sample " + std::to_string(count) + " distinct targets from " +
                     std::to_string(pixels) + " pixels");
  TargetSampler sampler(pixels, seed);
  TargetSample out{{}, seed, count};
  out.indices.reserve(count);
  for (std::size_t s = 0; s < count; ++s) out.indices.push_back(sampler.next());
  return out;
}

// ---------------------------------------------------------------------------
// Preflight

struct PreflightResult {
  HyperspectralCube cube;
  std::vector<std::size_t> constant_bands;  // 0-based
  std::uint64_t noise_seed = 0;
};

/// Replaces every constant band by standard normal noise so that the
/// covariance stays invertible. Band j draws from SplitMix64(derive_seed(seed, {j})).
inline PreflightResult preflight_constant_bands(const HyperspectralCube& cube,
                                                const BandStats& stats, std::uint64_t seed) {
  if (stats.bands() != cube.bands()) throw DimensionError("preflight: stats do not match cube");
  std::vector<std::size_t> flagged = stats.constant_bands();
  if (flagged.empty()) return PreflightResult{cube, {}, seed};
  BandMatrix data = cube.data();
  for (std::size_t j : flagged) {
    SplitMix64 rng(derive_seed(seed, {j}));
    auto row = data.row(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < row.size(); ++i) row[i] = rng.normal();
  }
  return PreflightResult{cube.with_data(std::move(data)), std::move(flagged), seed};
}

// ---------------------------------------------------------------------------
// MAV spectrum

/// Everything the per-target loop needs that does not depend on the seed:
/// band statistics and the factorized covariance of the centered cube.
class PreparedScene {
 public:
  explicit PreparedScene(const HyperspectralCube& cube, const ExecutionOptions& exec = {})
      : cube_(&cube),
        stats_(compute_band_stats(cube, exec)),
        model_(covariance(centralize(cube, stats_), exec)) {}

  [[nodiscard]] const HyperspectralCube& cube() const noexcept { return *cube_; }
  [[nodiscard]] const BandStats& stats() const noexcept { return stats_; }
  [[nodiscard]] const CovarianceModel& model() const noexcept { return model_; }

 private:
  const HyperspectralCube* cube_;
  BandStats stats_;
  CovarianceModel model_;
};

struct MavSpectrum {
  Vector values;
  std::size_t targets = 0;
  std::size_t skipped_targets = 0;
  std::uint64_t seed = 0;
  NmfConvention convention = NmfConvention::NormWeighted;
  double ridge_applied = 0.0;
};

/// Mean absolute NMF significance over `targets` sampled pixels. Degenerate
/// targets (spectrum equal to the mean) are replaced by further draws from
/// the same sampler stream, so the average is always over exactly `targets`
/// detectors.
inline MavSpectrum mav_spectrum(const PreparedScene& scene, std::size_t targets,
                                std::uint64_t seed,
                                NmfConvention convention = NmfConvention::NormWeighted,
                                const ExecutionOptions& exec = {}) {
  const HyperspectralCube& cube = scene.cube();
  if (targets == 0) throw InputError("number of targets must be at least 1");
  if (targets > cube.pixels())
    throw InputError("cannot sample " + std::to_string(targets) + " distinct targets from " +
                     std::to_string(cube.pixels()) + " pixels");

  TargetSampler sampler(cube.pixels(), seed);
  std::vector<std::size_t> chosen(targets);
  for (auto& c : chosen) c = sampler.next();

  std::vector<Vector> significance(targets);
  std::vector<char> ok(targets, 0);
  auto evaluate = [&](std::size_t s) {
    try {
      const MfDetector det =
          mf_detector(scene.model(), scene.stats().means, pixel_spectrum(cube, chosen[s]));
      significance[s] = nmf_significance(det, scene.stats(), convention).values;
      ok[s] = 1;
    } catch (const DegenerateTargetError&) {
      ok[s] = 0;
    }
  };
  parallel_for(targets, exec, evaluate);

  std::size_t skipped = 0;
  for (std::size_t s = 0; s < targets; ++s) {
    while (!ok[s]) {
      ++skipped;
      if (sampler.remaining() == 0)
        throw NumericError("every candidate target pixel is degenerate (equals the mean)");
      chosen[s] = sampler.next();
      evaluate(s);
    }
  }

  Vector sum = Vector::Zero(static_cast<Eigen::Index>(cube.bands()));
  for (const Vector& v : significance) sum += v.cwiseAbs();
  return MavSpectrum{sum / static_cast<double>(targets), targets, skipped, seed, convention,
                     scene.model().ridge_applied()};
}

inline MavSpectrum mav_spectrum(const HyperspectralCube& cube, std::size_t targets,
                                std::uint64_t seed,
                                NmfConvention convention = NmfConvention::NormWeighted,
                                const ExecutionOptions& exec = {}) {
  const PreparedScene scene(cube, exec);
  return mav_spectrum(scene, targets, seed, convention, exec);
}

// ---------------------------------------------------------------------------
// Thresholding

struct BadBandReport {
  double threshold = 0.0;
  std::vector<std::size_t> selected_bands;  // 1-based, sorted
  std::vector<std::string> ranges;          // "a-b" or "a"
  MavSpectrum mav;
  double ridge_applied = 0.0;
  std::vector<std::size_t> constant_bands;  // 1-based
  std::optional<std::uint64_t> noise_injection_seed;
  bool degenerate = false;  // every band was constant
};

/// Collapses sorted band numbers into maximal runs: {1,2,3,7} -> {"1-3","7"}.
inline std::vector<std::string> format_ranges(const std::vector<std::size_t>& sorted) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t k = i;
    while (k + 1 < sorted.size() && sorted[k + 1] == sorted[k] + 1) ++k;
    out.push_back(k == i ? std::to_string(sorted[i])
                         : std::to_string(sorted[i]) + "-" + std::to_string(sorted[k]));
    i = k + 1;
  }
  return out;
}

/// Selects bands whose MAV is no larger than `threshold` (inclusive). Bands
/// listed in `constant_bands` (0-based, from preflight) are always selected.
inline BadBandReport threshold_bands(const MavSpectrum& mav, double threshold,
                                     const std::vector<std::size_t>& constant_bands = {}) {
  if (!std::isfinite(threshold) || threshold < 0.0)
    throw InputError("threshold must be finite and non-negative");
  const auto L = static_cast<std::size_t>(mav.values.size());
  std::vector<char> pick(L, 0);
  for (std::size_t j = 0; j < L; ++j) pick[j] = mav.values[static_cast<Eigen::Index>(j)] <= threshold;
  for (std::size_t j : constant_bands) {
    if (j >= L) throw DimensionError("constant band index out of range");
    pick[j] = 1;
  }

  BadBandReport report;
  report.threshold = threshold;
  for (std::size_t j = 0; j < L; ++j)
    if (pick[j]) report.selected_bands.push_back(j + 1);
  report.ranges = format_ranges(report.selected_bands);
  report.mav = mav;
  report.ridge_applied = mav.ridge_applied;
  for (std::size_t j : constant_bands) report.constant_bands.push_back(j + 1);
  std::sort(report.constant_bands.begin(), report.constant_bands.end());
  report.degenerate = L > 0 && constant_bands.size() == L;
  return report;
}

// ---------------------------------------------------------------------------
// Whole pipeline

struct DetectOptions {
  std::size_t targets = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::uint64_t> noise_seed;  // defaults to seed
  NmfConvention convention = NmfConvention::NormWeighted;
  double threshold = 0.0;
  ExecutionOptions exec;
};

/// Preflight, MAV spectrum and thresholding in one call.
inline BadBandReport detect_bad_bands(const HyperspectralCube& cube, const DetectOptions& opt) {
  const std::uint64_t noise_seed = opt.noise_seed.value_or(opt.seed);
  const BandStats raw_stats = compute_band_stats(cube, opt.exec);
  PreflightResult pre = preflight_constant_bands(cube, raw_stats, noise_seed);
  const PreparedScene scene(pre.cube, opt.exec);
  const MavSpectrum mav = mav_spectrum(scene, opt.targets, opt.seed, opt.convention, opt.exec);
  BadBandReport report = threshold_bands(mav, opt.threshold, pre.constant_bands);
  if (!pre.constant_bands.empty()) report.noise_injection_seed = noise_seed;
  return report;
}

// ---------------------------------------------------------------------------
// Sensitivity sweep

/// 1..10 step 1, 20..100 step 10, 200..1000 step 100, 2000..10000 step 1000.
inline std::vector<std::size_t> default_target_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t m = 1; m <= 10; ++m) grid.push_back(m);
  for (std::size_t m = 20; m <= 100; m += 10) grid.push_back(m);
  for (std::size_t m = 200; m <= 1000; m += 100) grid.push_back(m);
  for (std::size_t m = 2000; m <= 10000; m += 1000) grid.push_back(m);
  return grid;
}

inline constexpr std::size_t kDefaultSweepRepeats = 20;

/// Seed of one sweep cell: derive_seed(seed, {M, threshold index, repeat}).
constexpr std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t targets,
                                        std::size_t threshold_index, std::size_t repeat) noexcept {
  return derive_seed(seed, {targets, threshold_index, repeat});
}

struct SweepCell {
  std::size_t targets = 0;
  double threshold = 0.0;
  std::size_t threshold_index = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> selected;  // empty when M exceeds the pixel count
};

struct SweepSummary {
  std::size_t targets = 0;
  double threshold = 0.0;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered by (M, threshold index, repeat)
  std::vector<SweepSummary> summary;
  std::vector<std::size_t> constant_bands;  // 1-based
};

/// Selected-band counts over a grid of target counts and thresholds.
/// Preflight noise uses `seed` once; each cell samples with its own derived seed.
inline SweepResult sensitivity_sweep(const HyperspectralCube& cube,
                                     const std::vector<std::size_t>& target_grid,
                                     const std::vector<double>& thresholds, std::size_t repeats,
                                     std::uint64_t seed,
                                     NmfConvention convention = NmfConvention::NormWeighted,
                                     const ExecutionOptions& exec = {}) {
  if (repeats == 0) throw InputError("repeats must be at least 1");
  if (target_grid.empty() || thresholds.empty())
    throw InputError("sweep needs at least one target count and one threshold");
  for (double t : thresholds)
    if (!std::isfinite(t) || t < 0.0) throw InputError("threshold must be finite and non-negative");

  const BandStats raw_stats = compute_band_stats(cube, exec);
  const PreflightResult pre = preflight_constant_bands(cube, raw_stats, seed);
  const PreparedScene scene(pre.cube, exec);

  SweepResult result;
  for (std::size_t j : pre.constant_bands) result.constant_bands.push_back(j + 1);
  for (std::size_t m : target_grid)
    for (std::size_t t = 0; t < thresholds.size(); ++t)
      for (std::size_t r = 0; r < repeats; ++r)
        result.cells.push_back(SweepCell{m, thresholds[t], t, r, sweep_cell_seed(seed, m, t, r), {}});

  parallel_for(result.cells.size(), exec, [&](std::size_t c) {
    SweepCell& cell = result.cells[c];
    if (cell.targets == 0 || cell.targets > cube.pixels()) return;
    const MavSpectrum mav = mav_spectrum(scene, cell.targets, cell.seed, convention);
    cell.selected = threshold_bands(mav, cell.threshold, pre.constant_bands).selected_bands.size();
  });

  for (std::size_t first = 0; first < result.cells.size(); first += repeats) {
    SweepSummary s;
    s.targets = result.cells[first].targets;
    s.threshold = result.cells[first].threshold;
    std::vector<double> counts;
    for (std::size_t r = 0; r < repeats; ++r)
      if (const auto& sel = result.cells[first + r].selected) counts.push_back(static_cast<double>(*sel));
    s.runs = counts.size();
    if (!counts.empty()) {
      double sum = 0.0;
      for (double v : counts) sum += v;
      s.mean = sum / static_cast<double>(counts.size());
      double ss = 0.0;
      for (double v : counts) ss += (v - s.mean) * (v - s.mean);
      s.stddev = counts.size() > 1 ? std::sqrt(ss / static_cast<double>(counts.size() - 1)) : 0.0;
      s.min = static_cast<std::size_t>(*std::min_element(counts.begin(), counts.end()));
      s.max = static_cast<std::size_t>(*std::max_element(counts.begin(), counts.end()));
    }
    result.summary.push_back(s);
  }
  return result;
}

}  // namespace badband
