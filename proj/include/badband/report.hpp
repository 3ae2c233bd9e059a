#pragma once

// On-disk artifacts of the command line tool.
//
//   report.json  keys: tool_version, input_sha256, seed, targets, convention,
//                ridge_applied, constant_bands, threshold, selected_bands,
//                ranges, mav, skipped_targets, plus n_selected, degenerate,
//                noise_injection_seed and bbl_bad_bands
//   report.csv   band,wavelength,mav,selected
//   sweep.csv    M,thres,repeat,n_selected

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "badband/detector.hpp"
#include "badband/envi.hpp"
#include "badband/synth.hpp"

namespace badband {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// 17 significant digits, '.' decimal point, independent of locale.
inline std::string format_g17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct RunProvenance {
  std::string input_sha256;
  std::uint64_t seed = kDefaultSeed;
  std::size_t targets = 0;
  NmfConvention convention = NmfConvention::NormWeighted;
};

inline nlohmann::ordered_json report_to_json(const BadBandReport& report, const RunProvenance& run,
                                             const std::optional<std::vector<bool>>& bbl = std::nullopt) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["input_sha256"] = run.input_sha256;
  j["seed"] = run.seed;
  j["targets"] = run.targets;
  j["convention"] = to_string(run.convention);
  j["ridge_applied"] = report.ridge_applied;
  j["constant_bands"] = report.constant_bands;
  j["threshold"] = report.threshold;
  j["selected_bands"] = report.selected_bands;
  j["n_selected"] = report.selected_bands.size();
  j["ranges"] = report.ranges;
  std::vector<double> mav(report.mav.values.data(), report.mav.values.data() + report.mav.values.size());
  j["mav"] = mav;
  j["skipped_targets"] = report.mav.skipped_targets;
  j["degenerate"] = report.degenerate;
  j["noise_injection_seed"] = report.noise_injection_seed ? nlohmann::ordered_json(*report.noise_injection_seed)
                                                          : nlohmann::ordered_json(nullptr);
  if (bbl) {
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < bbl->size(); ++k)
      if (!(*bbl)[k]) bad.push_back(k + 1);
    j["bbl_bad_bands"] = bad;
  }
  return j;
}

inline std::string report_to_csv(const BadBandReport& report,
                                 const std::optional<std::vector<double>>& wavelengths) {
  std::ostringstream out;
  out << "band,wavelength,mav,selected\n";
  const auto L = static_cast<std::size_t>(report.mav.values.size());
  std::vector<char> selected(L + 1, 0);
  for (std::size_t b : report.selected_bands) selected[b] = 1;
  for (std::size_t j = 0; j < L; ++j) {
    out << (j + 1) << ',';
    if (wavelengths) out << format_g17((*wavelengths)[j]);
    out << ',' << format_g17(report.mav.values[static_cast<Eigen::Index>(j)]) << ','
        << static_cast<int>(selected[j + 1]) << '\n';
  }
  return out.str();
}

inline std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "M,thres,repeat,n_selected\n";
  for (const SweepCell& c : sweep.cells) {
    out << c.targets << ',' << detail::format_double(c.threshold) << ',' << c.repeat << ',';
    if (c.selected) out << *c.selected;
    else out << "skipped";
    out << '\n';
  }
  return out.str();
}

inline std::string sweep_summary_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "M,thres,runs,mean,stddev,min,max\n";
  for (const SweepSummary& s : sweep.summary) {
    out << s.targets << ',' << detail::format_double(s.threshold) << ',' << s.runs << ',';
    if (s.runs) out << format_g17(s.mean) << ',' << format_g17(s.stddev) << ',' << s.min << ',' << s.max;
    else out << ",,,";
    out << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json score_to_json(const DetectionScore& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["true_positives"] = s.true_positives;
  j["false_positives"] = s.false_positives;
  j["false_negatives"] = s.false_negatives;
  j["true_negatives"] = s.true_negatives;
  j["no_predictions"] = s.no_predictions;
  j["no_truth"] = s.no_truth;
  return j;
}

/// Binary PGM (P5) of one band, min-max stretched to 0..255. A constant band
/// becomes uniform 128.
inline std::string band_to_pgm(std::span<const double> plane, std::size_t lines, std::size_t samples) {
  if (plane.size() != lines * samples) throw DimensionError("band plane does not match geometry");
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::string out = "P5\n" + std::to_string(samples) + " " + std::to_string(lines) + "\n255\n";
  out.reserve(out.size() + plane.size());
  for (double v : plane) {
    const long level = range > 0.0 ? std::lround((v - min) / range * 255.0) : 128;
    out += static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0L, 255L)));
  }
  return out;
}

}  // namespace badband
