#pragma once

// Synthetic cubes with known bad bands.
//
// Clean band j, pixel i:  signal_scale * base[j] * a[i] + e[j][i]
//   base[j] = 1.5 + 0.5 sin(3 pi j / L)      smooth, in [1, 2]
//   a[i]    = 0.5 + u[i], u ~ U(0, 1)        positive abundance
//   e       ~ N(0, 1)                        background noise
// Fault kinds replace that formula on their band range:
//   dead        constant `value`
//   low_snr     fault.signal_scale * base[j] * a[i] + fault.noise_scale * e[j][i]
//   pure_noise  fault.noise_scale * e[j][i]
//
// One SplitMix64 stream per cube: N abundance uniforms, then L*N normals in
// band-major order. Every band consumes its normals whatever its kind, so
// changing one fault leaves all other bands bit-identical.
//
// The fault parameters are this harness's own choices, not measurements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "badband/cube.hpp"
#include "badband/detector.hpp"
#include "badband/error.hpp"
#include "badband/random.hpp"

namespace badband {

enum class FaultKind { Dead, LowSnr, PureNoise };

inline std::string_view to_string(FaultKind k) noexcept {
  switch (k) {
    case FaultKind::Dead: return "dead";
    case FaultKind::LowSnr: return "low_snr";
    case FaultKind::PureNoise: return "pure_noise";
  }
  return "";
}

struct Fault {
  std::size_t first = 1;  // 1-based, inclusive
  std::size_t last = 1;
  FaultKind kind = FaultKind::PureNoise;
  double signal_scale = 0.0;
  double noise_scale = 1.0;
  double value = 0.0;  // dead bands only

  friend bool operator==(const Fault&, const Fault&) = default;
};

struct SyntheticSpec {
  std::size_t lines = 40;
  std::size_t samples = 50;
  std::size_t bands = 60;
  double signal_scale = 80.0;
  std::uint64_t seed = kDefaultSeed;
  std::vector<Fault> faults;
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.lines == 0 || spec.samples == 0 || spec.bands == 0)
    throw InputError("synthetic spec: lines, samples and bands must be positive");
  if (!(spec.signal_scale > 0.0)) throw InputError("synthetic spec: signal_scale must be > 0");
  for (const Fault& f : spec.faults) {
    if (f.first < 1 || f.last < f.first || f.last > spec.bands)
      throw InputError("synthetic spec: fault range " + std::to_string(f.first) + "-" +
                       std::to_string(f.last) + " outside [1, " + std::to_string(spec.bands) + "]");
    if (f.kind == FaultKind::LowSnr && !(f.signal_scale > 0.0 && f.noise_scale > 0.0))
      throw InputError("synthetic spec: low_snr needs signal_scale > 0 and noise_scale > 0");
    if (f.kind == FaultKind::PureNoise && !(f.noise_scale > 0.0))
      throw InputError("synthetic spec: pure_noise needs noise_scale > 0");
    if (f.kind == FaultKind::Dead && !std::isfinite(f.value))
      throw InputError("synthetic spec: dead band value must be finite");
  }
  for (std::size_t a = 0; a < spec.faults.size(); ++a)
    for (std::size_t b = a + 1; b < spec.faults.size(); ++b) {
      const Fault& x = spec.faults[a];
      const Fault& y = spec.faults[b];
      const bool overlap = x.first <= y.last && y.first <= x.last;
      auto same_effect = [](Fault p, Fault q) {
        p.first = q.first = 0;
        p.last = q.last = 0;
        return p == q;
      };
      if (overlap && !same_effect(x, y))
        throw InputError("synthetic spec: contradictory faults overlap on bands " +
                         std::to_string(std::max(x.first, y.first)) + "-" +
                         std::to_string(std::min(x.last, y.last)));
    }
}

inline SyntheticSpec parse_synthetic_spec(const nlohmann::json& j) {
  try {
    SyntheticSpec spec;
    spec.lines = j.value("lines", spec.lines);
    spec.samples = j.value("samples", spec.samples);
    spec.bands = j.value("bands", spec.bands);
    spec.signal_scale = j.value("signal_scale", spec.signal_scale);
    spec.seed = j.value("seed", spec.seed);
    for (const auto& f : j.value("faults", nlohmann::json::array())) {
      Fault fault;
      const std::string kind = f.at("kind").get<std::string>();
      if (kind == "dead") fault.kind = FaultKind::Dead;
      else if (kind == "low_snr") fault.kind = FaultKind::LowSnr;
      else if (kind == "pure_noise") fault.kind = FaultKind::PureNoise;
      else throw InputError("synthetic spec: unknown fault kind '" + kind + "'");
      fault.first = f.at("first").get<std::size_t>();
      fault.last = f.value("last", fault.first);
      fault.signal_scale = fault.kind == FaultKind::LowSnr ? f.at("signal_scale").get<double>() : 0.0;
      fault.noise_scale = fault.kind == FaultKind::Dead ? 0.0 : f.value("noise_scale", 1.0);
      fault.value = fault.kind == FaultKind::Dead ? f.value("value", 0.0) : 0.0;
      spec.faults.push_back(fault);
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("synthetic spec: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json j;
  j["lines"] = spec.lines;
  j["samples"] = spec.samples;
  j["bands"] = spec.bands;
  j["signal_scale"] = spec.signal_scale;
  j["seed"] = spec.seed;
  j["faults"] = nlohmann::ordered_json::array();
  for (const Fault& f : spec.faults) {
    nlohmann::ordered_json jf;
    jf["kind"] = to_string(f.kind);
    jf["first"] = f.first;
    jf["last"] = f.last;
    if (f.kind == FaultKind::LowSnr) jf["signal_scale"] = f.signal_scale;
    if (f.kind != FaultKind::Dead) jf["noise_scale"] = f.noise_scale;
    if (f.kind == FaultKind::Dead) jf["value"] = f.value;
    j["faults"].push_back(jf);
  }
  return j;
}

/// The reference benchmark: 40x50 pixels, 60 bands, clean-band SNR between
/// 23 and 46, bands 20-25 pure noise, band 45 dead.
inline SyntheticSpec fault60_spec(std::uint64_t seed = kDefaultSeed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.faults.push_back(Fault{20, 25, FaultKind::PureNoise, 0.0, 1.0, 0.0});
  spec.faults.push_back(Fault{45, 45, FaultKind::Dead, 0.0, 0.0, 0.0});
  return spec;
}

inline double base_spectrum(std::size_t band, std::size_t bands) noexcept {
  return 1.5 + 0.5 * std::sin(3.0 * std::numbers::pi * static_cast<double>(band) /
                              static_cast<double>(bands));
}

struct SyntheticCube {
  HyperspectralCube cube;
  std::vector<std::size_t> truth;  // 1-based bad bands
};

inline SyntheticCube gen_injected_cube(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t n = spec.lines * spec.samples;
  const std::size_t L = spec.bands;
  SplitMix64 rng(spec.seed);
  std::vector<double> abundance(n);
  for (double& a : abundance) a = 0.5 + rng.uniform01();

  std::vector<const Fault*> fault_of(L, nullptr);
  for (const Fault& f : spec.faults)
    for (std::size_t b = f.first; b <= f.last; ++b) fault_of[b - 1] = &f;

  BandMatrix data(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < L; ++j) {
    const double base = base_spectrum(j, L);
    const Fault* f = fault_of[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double e = rng.normal();
      double v = spec.signal_scale * base * abundance[i] + e;
      if (f) {
        switch (f->kind) {
          case FaultKind::Dead: v = f->value; break;
          case FaultKind::LowSnr: v = f->signal_scale * base * abundance[i] + f->noise_scale * e; break;
          case FaultKind::PureNoise: v = f->noise_scale * e; break;
        }
      }
      data(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  std::vector<std::size_t> truth;
  for (std::size_t j = 0; j < L; ++j)
    if (fault_of[j]) truth.push_back(j + 1);
  return SyntheticCube{HyperspectralCube(spec.lines, spec.samples, std::move(data)), std::move(truth)};
}

// ---------------------------------------------------------------------------
// The 51 x 51 x 3 illustration: standard normal bands, central 3 x 3 block
// set to 255 in bands 1 and 3.

inline constexpr std::size_t kFigure1Size = 51;
inline constexpr double kFigure1TargetValue = 255.0;

struct Figure1Scene {
  HyperspectralCube cube;
  std::vector<std::size_t> targets;  // 9 pixel indices, row-major
};

inline Figure1Scene gen_figure1_cube(std::uint64_t seed) {
  constexpr std::size_t side = kFigure1Size;
  constexpr std::size_t n = side * side;
  SplitMix64 rng(seed);
  BandMatrix data(3, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < 3; ++j)
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) data(j, i) = rng.normal();
  std::vector<std::size_t> targets;
  constexpr std::size_t lo = side / 2 - 1;
  for (std::size_t line = lo; line < lo + 3; ++line)
    for (std::size_t sample = lo; sample < lo + 3; ++sample) {
      const std::size_t idx = line * side + sample;
      targets.push_back(idx);
      data(0, static_cast<Eigen::Index>(idx)) = kFigure1TargetValue;
      data(2, static_cast<Eigen::Index>(idx)) = kFigure1TargetValue;
    }
  return Figure1Scene{HyperspectralCube(side, side, std::move(data)), std::move(targets)};
}

/// MF detector whose signature is the mean spectrum of the target block.
inline MfDetector figure1_detector(const Figure1Scene& scene) {
  const BandStats stats = compute_band_stats(scene.cube);
  const CovarianceModel model = covariance(centralize(scene.cube, stats));
  return mf_detector(model, stats.means, mean_spectrum(scene.cube, scene.targets));
}

// ---------------------------------------------------------------------------
// Scoring

struct DetectionScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  bool no_predictions = false;  // precision reported as 1.0 by convention
  bool no_truth = false;        // recall reported as 1.0 by convention
};

/// Precision/recall/F1 over 1-based band numbers in [1, bands].
inline DetectionScore score_detection(const std::vector<std::size_t>& predicted,
                                      const std::vector<std::size_t>& truth, std::size_t bands) {
  const std::set<std::size_t> p(predicted.begin(), predicted.end());
  const std::set<std::size_t> t(truth.begin(), truth.end());
  for (std::size_t b : p)
    if (b < 1 || b > bands) throw DimensionError("predicted band " + std::to_string(b) + " out of range");
  for (std::size_t b : t)
    if (b < 1 || b > bands) throw DimensionError("truth band " + std::to_string(b) + " out of range");

  DetectionScore s;
  for (std::size_t b = 1; b <= bands; ++b) {
    const bool in_p = p.contains(b);
    const bool in_t = t.contains(b);
    if (in_p && in_t) ++s.true_positives;
    else if (in_p) ++s.false_positives;
    else if (in_t) ++s.false_negatives;
    else ++s.true_negatives;
  }
  s.no_predictions = p.empty();
  s.no_truth = t.empty();
  const auto tp = static_cast<double>(s.true_positives);
  s.precision = s.no_predictions ? 1.0 : tp / static_cast<double>(p.size());
  s.recall = s.no_truth ? 1.0 : tp / static_cast<double>(t.size());
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline DetectionScore score_detection(const BadBandReport& report, const std::vector<std::size_t>& truth) {
  return score_detection(report.selected_bands, truth,
                         static_cast<std::size_t>(report.mav.values.size()));
}

/// Benchmark-only threshold: sort the MAV values and cut at the largest
/// ratio between consecutive values. Returns the geometric midpoint of that
/// gap (half the upper value when the lower one is zero), so that rounding
/// noise in the MAV cannot move a band across the threshold.
inline double gap_threshold(const Vector& mav) {
  if (mav.size() < 2) throw InputError("gap threshold needs at least two bands");
  std::vector<double> v(mav.data(), mav.data() + mav.size());
  std::sort(v.begin(), v.end());
  std::size_t best = 0;
  double best_ratio = -1.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    double ratio;
    if (v[k] > 0.0) ratio = v[k + 1] / v[k];
    else ratio = v[k + 1] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  if (v[best] > 0.0) return std::sqrt(v[best] * v[best + 1]);
  return 0.5 * v[best + 1];
}

}  // namespace badband
