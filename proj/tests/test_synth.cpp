#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "badband/detector.hpp"
#include "badband/synth.hpp"
#include "oracles.hpp"

using namespace badband;

namespace {

double mean_of(std::span<const double> v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

/// min MAV over clean bands divided by max MAV over injected bands.
double clean_to_fault_gap(const Vector& mav, const std::vector<std::size_t>& truth) {
  double clean = std::numeric_limits<double>::infinity(), bad = 0.0;
  for (Eigen::Index j = 0; j < mav.size(); ++j) {
    const bool injected = std::find(truth.begin(), truth.end(), static_cast<std::size_t>(j + 1)) != truth.end();
    if (injected) bad = std::max(bad, mav[j]);
    else clean = std::min(clean, mav[j]);
  }
  return clean / bad;
}

}  // namespace

TEST(Figure1Cube, GeometryAndTargetBlock) {
  const Figure1Scene scene = gen_figure1_cube(kDefaultSeed);
  EXPECT_EQ(scene.cube.lines(), 51u);
  EXPECT_EQ(scene.cube.samples(), 51u);
  EXPECT_EQ(scene.cube.bands(), 3u);
  ASSERT_EQ(scene.targets.size(), 9u);
  for (std::size_t t : scene.targets) {
    EXPECT_GE(t / 51, 24u);
    EXPECT_LE(t / 51, 26u);
    EXPECT_GE(t % 51, 24u);
    EXPECT_LE(t % 51, 26u);
  }
  for (std::size_t b : {0u, 2u}) {
    const auto plane = scene.cube.band(b);
    EXPECT_EQ(std::count(plane.begin(), plane.end(), 255.0), 9);
    for (std::size_t t : scene.targets) EXPECT_EQ(plane[t], 255.0);
  }
  EXPECT_EQ(std::count(scene.cube.band(1).begin(), scene.cube.band(1).end(), 255.0), 0);
}

TEST(Figure1Cube, BandTwoIsStandardNormalNoise) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto plane = gen_figure1_cube(seed).cube.band(1);
    EXPECT_NEAR(mean_of(plane), 0.0, 4.0 / std::sqrt(2601.0));
  }
}

TEST(Figure1Cube, BitDeterministicInSeed) {
  EXPECT_EQ(gen_figure1_cube(7).cube.data(), gen_figure1_cube(7).cube.data());
  EXPECT_NE(gen_figure1_cube(7).cube.data(), gen_figure1_cube(8).cube.data());
}

TEST(Figure1Cube, TargetBlockDetectorHasLargeSmallLargePattern) {
  const Figure1Scene scene = gen_figure1_cube(kDefaultSeed);
  const MfDetector det = figure1_detector(scene);
  const Vector w = det.weights.cwiseAbs();
  EXPECT_LT(w[1], 0.05 * std::min(w[0], w[2]));
  EXPECT_LT(std::abs(w[0] - w[2]) / std::max(w[0], w[2]), 0.25);
}

TEST(Figure1Cube, EverySingleTargetRanksBandTwoLowestInSignificance) {
  // Raw single-pixel weights are dominated by that pixel's band-2 noise draw;
  // once weighted by the band norms, band 2 is the least significant band
  // for every one of the nine targets.
  const Figure1Scene scene = gen_figure1_cube(kDefaultSeed);
  const BandStats stats = compute_band_stats(scene.cube);
  const CovarianceModel model = covariance(centralize(scene.cube, stats));
  for (std::size_t t : scene.targets) {
    const Vector v =
        nmf_significance(mf_detector(model, stats.means, pixel_spectrum(scene.cube, t)), stats).values;
    EXPECT_LT(v[1], std::min(v[0], v[2])) << "target " << t;
  }
}

TEST(InjectedCube, NoFaultsMeansEmptyTruth) {
  SyntheticSpec spec;
  spec.lines = 5;
  spec.samples = 6;
  spec.bands = 8;
  const SyntheticCube syn = gen_injected_cube(spec);
  EXPECT_TRUE(syn.truth.empty());
  EXPECT_FALSE(compute_band_stats(syn.cube).constant_band_flags[0]);
}

TEST(InjectedCube, BitDeterministicInSeed) {
  const SyntheticSpec spec = fault60_spec(5);
  EXPECT_EQ(gen_injected_cube(spec).cube.data(), gen_injected_cube(spec).cube.data());
  EXPECT_NE(gen_injected_cube(spec).cube.data(), gen_injected_cube(fault60_spec(6)).cube.data());
}

TEST(InjectedCube, CleanBandsHaveTheDocumentedSnr) {
  SyntheticSpec spec;
  spec.bands = 10;
  const SyntheticCube syn = gen_injected_cube(spec);
  const BandStats s = compute_band_stats(syn.cube);
  for (std::size_t j = 0; j < 10; ++j) {
    // Signal std = scale * base / sqrt(12); noise std = 1.
    const double signal = spec.signal_scale * base_spectrum(j, 10) / std::sqrt(12.0);
    const double expected = std::sqrt(signal * signal + 1.0);
    EXPECT_NEAR(std::sqrt(s.variances[static_cast<Eigen::Index>(j)]), expected, 0.1 * expected);
    EXPECT_GE(signal, 20.0);
  }
}

TEST(InjectedCube, DeadBandIsConstantAndCaughtByPreflight) {
  SyntheticSpec spec;
  spec.lines = 10;
  spec.samples = 10;
  spec.bands = 12;
  spec.faults.push_back(Fault{4, 4, FaultKind::Dead, 0.0, 0.0, 3.5});
  const SyntheticCube syn = gen_injected_cube(spec);
  EXPECT_EQ(syn.truth, std::vector<std::size_t>{4});
  for (double v : syn.cube.band(3)) EXPECT_EQ(v, 3.5);
  DetectOptions opt;
  opt.targets = 30;
  opt.threshold = 0.0;
  const BadBandReport r = detect_bad_bands(syn.cube, opt);
  EXPECT_EQ(r.constant_bands, std::vector<std::size_t>{4});
  EXPECT_EQ(score_detection(r, syn.truth).recall, 1.0);
}

TEST(InjectedCube, Fault60IsRecoveredExactlyWithTheGapThreshold) {
  const SyntheticCube syn = gen_injected_cube(fault60_spec());
  EXPECT_EQ(syn.truth, (std::vector<std::size_t>{20, 21, 22, 23, 24, 25, 45}));
  DetectOptions opt;
  opt.targets = 1000;
  const BandStats stats = compute_band_stats(syn.cube);
  const PreflightResult pre = preflight_constant_bands(syn.cube, stats, opt.seed);
  const MavSpectrum mav = mav_spectrum(pre.cube, opt.targets, opt.seed);
  opt.threshold = gap_threshold(mav.values);
  const DetectionScore s = score_detection(detect_bad_bands(syn.cube, opt), syn.truth);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(InjectedCube, RaisingNoiseScaleNeverShrinksTheGap) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    double gaps[2];
    int k = 0;
    for (double noise : {1.0, 4.0}) {
      SyntheticSpec spec;
      spec.lines = 20;
      spec.samples = 20;
      spec.bands = 24;
      spec.seed = seed;
      spec.faults.push_back(Fault{8, 10, FaultKind::PureNoise, 0.0, noise, 0.0});
      const SyntheticCube syn = gen_injected_cube(spec);
      gaps[k++] = clean_to_fault_gap(mav_spectrum(syn.cube, 100, seed).values, syn.truth);
    }
    EXPECT_GE(gaps[1], gaps[0] * (1.0 - 1e-9)) << "seed " << seed;
    EXPECT_GT(gaps[0], 1.0) << "seed " << seed;
  }
}

TEST(SyntheticSpec, ContradictoryOverlapIsRejected) {
  SyntheticSpec spec;
  spec.faults.push_back(Fault{3, 5, FaultKind::Dead, 0.0, 0.0, 0.0});
  spec.faults.push_back(Fault{5, 6, FaultKind::PureNoise, 0.0, 1.0, 0.0});
  EXPECT_THROW(gen_injected_cube(spec), InputError);
  spec.faults[1] = Fault{6, 7, FaultKind::PureNoise, 0.0, 1.0, 0.0};
  EXPECT_NO_THROW(validate(spec));
  spec.faults[1] = Fault{6, 61, FaultKind::PureNoise, 0.0, 1.0, 0.0};
  EXPECT_THROW(validate(spec), InputError);
}

TEST(SyntheticSpec, JsonRoundTrip) {
  SyntheticSpec spec = fault60_spec(9);
  spec.faults.push_back(Fault{30, 31, FaultKind::LowSnr, 2.0, 3.0, 0.0});
  const SyntheticSpec back = parse_synthetic_spec(nlohmann::json::parse(to_json(spec).dump()));
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.bands, 60u);
  EXPECT_EQ(back.faults, spec.faults);
  EXPECT_THROW(parse_synthetic_spec(nlohmann::json::parse(R"({"faults":[{"kind":"stripe","first":1}]})")),
               InputError);
  EXPECT_THROW(parse_synthetic_spec(nlohmann::json::parse(R"({"lines":"ten"})")), InputError);
}

TEST(SyntheticSpec, BenchFileMatchesBuiltInFault60) {
  std::ifstream in(std::string(BADBAND_BENCH_DIR) + "/fault60.json");
  ASSERT_TRUE(in) << "bench/fault60.json missing";
  const SyntheticSpec spec = parse_synthetic_spec(nlohmann::json::parse(in));
  EXPECT_EQ(to_json(spec).dump(), to_json(fault60_spec()).dump());
}

TEST(ScoreDetection, PerfectAndHandCountedCases) {
  const DetectionScore perfect = score_detection({2, 3}, {2, 3}, 5);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  const DetectionScore s = score_detection({1, 2, 3}, {2, 3, 4}, 6);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
  EXPECT_EQ(s.true_positives + s.false_positives + s.false_negatives + s.true_negatives, 6u);
  EXPECT_EQ(s.true_negatives, 2u);
}

TEST(ScoreDetection, EmptyPredictionIsFlagged) {
  const DetectionScore s = score_detection({}, {2, 4}, 5);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_TRUE(s.no_predictions);
  EXPECT_THROW(score_detection({6}, {}, 5), DimensionError);
}

TEST(GapThreshold, CutsAtLargestRatio) {
  EXPECT_DOUBLE_EQ(gap_threshold((Vector(5) << 6, 0.1, 5, 0.12, 7).finished()), std::sqrt(0.12 * 5));
  EXPECT_EQ(gap_threshold((Vector(3) << 0, 0, 4).finished()), 2.0);
  EXPECT_EQ(gap_threshold((Vector(2) << 3, 3).finished()), 3.0);
  EXPECT_THROW(gap_threshold(Vector::Ones(1)), InputError);
}
