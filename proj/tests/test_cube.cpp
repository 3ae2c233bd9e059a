#include <gtest/gtest.h>

#include <cmath>

#include "badband/cube.hpp"
#include "oracles.hpp"

using namespace badband;

namespace {

HyperspectralCube cube_from(std::size_t lines, std::size_t samples, std::size_t bands,
                            std::vector<double> band_major) {
  return HyperspectralCube::from_band_major(lines, samples, bands, band_major);
}

}  // namespace

TEST(HyperspectralCube, RejectsInconsistentShapes) {
  EXPECT_THROW(cube_from(2, 2, 2, std::vector<double>(7, 0.0)), DimensionError);
  EXPECT_THROW(HyperspectralCube(0, 1, BandMatrix(1, 0)), InputError);
  BandMatrix data(2, 4);
  data.setZero();
  EXPECT_THROW(HyperspectralCube(2, 2, data, std::vector<double>{0.5}), DimensionError);
  data(1, 3) = std::nan("");
  EXPECT_THROW(HyperspectralCube(2, 2, data), InputError);
}

TEST(BandStats, ConstantBandHasItsValueAsMeanAndZeroNorm) {
  const auto cube = cube_from(1, 4, 2, {5, 5, 5, 5, 1, 2, 3, 4});
  const BandStats s = compute_band_stats(cube);
  EXPECT_EQ(s.means[0], 5.0);
  EXPECT_EQ(s.centered_norms[0], 0.0);
  EXPECT_TRUE(s.constant_band_flags[0]);
  EXPECT_FALSE(s.constant_band_flags[1]);
  EXPECT_EQ(s.constant_bands(), std::vector<std::size_t>{0});
}

TEST(BandStats, SymmetricPairHasZeroMeanAndRootTwoNorm) {
  const auto cube = cube_from(1, 2, 1, {1, -1});
  const BandStats s = compute_band_stats(cube);
  EXPECT_EQ(s.means[0], 0.0);
  EXPECT_DOUBLE_EQ(s.centered_norms[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.variances[0], 1.0);
}

TEST(BandStats, MatchesTwoPassOracle) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto cube = oracle::random_cube(2, 2, 3, seed, 100.0);
    const BandStats s = compute_band_stats(cube);
    const auto [means, norms] = oracle::mean_and_norm(cube);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(s.means[j], means[j], 1e-12 * std::abs(means[j]));
      EXPECT_NEAR(s.centered_norms[j], norms[j], 1e-12 * norms[j]);
      EXPECT_NEAR(s.variances[j], s.centered_norms[j] * s.centered_norms[j] / 4.0, 1e-15 * norms[j] * norms[j]);
    }
  }
}

TEST(BandStats, ThreadCountDoesNotChangeBits) {
  const auto cube = oracle::random_cube(20, 30, 17, 5, 3.0);
  const BandStats a = compute_band_stats(cube, {1});
  const BandStats b = compute_band_stats(cube, {4});
  EXPECT_TRUE((a.means.array() == b.means.array()).all());
  EXPECT_TRUE((a.centered_norms.array() == b.centered_norms.array()).all());
}

TEST(Centralize, ConstantBandBecomesZero) {
  const auto cube = cube_from(1, 3, 1, {5, 5, 5});
  const auto c = centralize(cube, compute_band_stats(cube));
  EXPECT_TRUE((c.data().array() == 0.0).all());
}

TEST(Centralize, ZeroMeanBandUnchangedBitForBit) {
  const auto cube = cube_from(1, 4, 1, {1.5, -1.5, 2.25, -2.25});
  const auto c = centralize(cube, compute_band_stats(cube));
  EXPECT_TRUE((c.data().array() == cube.data().array()).all());
}

TEST(Centralize, OutputMeansVanishRelativeToNorms) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto cube = oracle::random_cube(3, 5, 4, seed, 1e3);
    const BandStats s = compute_band_stats(cube);
    const auto c = centralize(cube, s);
    const auto [means, norms] = oracle::mean_and_norm(c);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_LE(std::abs(means[j]), 1e-12 * s.centered_norms[j]);
  }
}

TEST(Centralize, IsIdempotentWithRefreshedStats) {
  const auto cube = oracle::random_cube(6, 7, 5, 9, 50.0);
  const auto once = centralize(cube, compute_band_stats(cube));
  const auto twice = centralize(once, compute_band_stats(once));
  EXPECT_LE(oracle::rel_err(twice.data(), once.data()), 1e-12);
}

TEST(Centralize, RejectsMismatchedStats) {
  const auto cube = cube_from(1, 2, 2, {1, 2, 3, 4});
  const auto other = cube_from(1, 2, 1, {1, 2});
  EXPECT_THROW(centralize(cube, compute_band_stats(other)), DimensionError);
}

TEST(PixelSpectrum, ReturnsBandValuesInOrder) {
  const auto cube = cube_from(1, 1, 3, {2, 4, 6});
  const Vector r = pixel_spectrum(cube, 0);
  EXPECT_EQ(r, (Vector(3) << 2, 4, 6).finished());
  EXPECT_THROW(pixel_spectrum(cube, 1), InputError);
}

TEST(PixelSpectrum, ScatterBackReconstructsPlanes) {
  const auto cube = oracle::random_cube(4, 6, 5, 2);
  BandMatrix rebuilt(5, 24);
  for (std::size_t i = 0; i < cube.pixels(); ++i) rebuilt.col(i) = pixel_spectrum(cube, i);
  EXPECT_TRUE((rebuilt.array() == cube.data().array()).all());
}

TEST(PixelSpectrum, AverageOverPixelsIsTheBandMean) {
  const auto cube = oracle::random_cube(5, 5, 4, 21, 10.0);
  const BandStats s = compute_band_stats(cube);
  Vector acc = Vector::Zero(4);
  for (std::size_t i = 0; i < cube.pixels(); ++i) acc += pixel_spectrum(cube, i);
  acc /= static_cast<double>(cube.pixels());
  EXPECT_LE(oracle::rel_err(acc, s.means), 1e-10);
}

TEST(Centralize, ConstantBandCarriesNoInformation) {
  const auto cube = cube_from(1, 3, 2, {0.1, 0.1, 0.1, 1, 2, 3});
  const BandStats s = compute_band_stats(cube);
  ASSERT_TRUE(s.constant_band_flags[0]);
  const auto c = centralize(cube, s);
  for (double v : c.band(0)) EXPECT_EQ(v, 0.0);
}
