#pragma once

// Minimal static SVG line plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "badband/detector.hpp"

namespace badband {

namespace detail {

inline constexpr double kPlotWidth = 900.0;
inline constexpr double kPlotHeight = 420.0;
inline constexpr double kMarginLeft = 70.0;
inline constexpr double kMarginRight = 20.0;
inline constexpr double kMarginTop = 30.0;
inline constexpr double kMarginBottom = 50.0;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Linear or log10 mapping of a data interval onto a pixel interval.
struct Axis {
  double lo, hi;
  double pixel_lo, pixel_hi;
  bool log;

  [[nodiscard]] double operator()(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    const double t = b > a ? (x - a) / (b - a) : 0.5;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }

  [[nodiscard]] std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::floor(std::log10(lo)); d <= std::ceil(std::log10(hi)); d += 1.0) {
        const double v = std::pow(10.0, d);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
      return out;
    }
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
};

inline void frame(std::ostringstream& svg, const Axis& x, const Axis& y, std::string_view title,
                  std::string_view xlabel, std::string_view ylabel) {
  svg << "<text x=\"" << num(kPlotWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << num(kMarginLeft) << "\" y=\"" << num(kMarginTop) << "\" width=\""
      << num(kPlotWidth - kMarginLeft - kMarginRight) << "\" height=\""
      << num(kPlotHeight - kMarginTop - kMarginBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : x.ticks()) {
    svg << "<line x1=\"" << num(x(t)) << "\" y1=\"" << num(y.pixel_lo) << "\" x2=\"" << num(x(t))
        << "\" y2=\"" << num(y.pixel_lo + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x(t)) << "\" y=\"" << num(y.pixel_lo + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  for (double t : y.ticks()) {
    svg << "<line x1=\"" << num(x.pixel_lo - 5) << "\" y1=\"" << num(y(t)) << "\" x2=\"" << num(x.pixel_lo)
        << "\" y2=\"" << num(y(t)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x.pixel_lo - 8) << "\" y=\"" << num(y(t) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num(kPlotWidth / 2) << "\" y=\"" << num(kPlotHeight - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(xlabel) << "</text>\n";
  svg << "<text x=\"15\" y=\"" << num(kPlotHeight / 2) << "\" text-anchor=\"middle\" font-size=\"12\""
      << " transform=\"rotate(-90 15 " << num(kPlotHeight / 2) << ")\">" << xml_escape(ylabel) << "</text>\n";
}

inline std::string header() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(kPlotWidth) + "\" height=\"" + num(kPlotHeight) + "\" viewBox=\"0 0 " + num(kPlotWidth) + " " +
         num(kPlotHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

/// MAV against band number. Bands marked bad in `bbl` are shaded, the
/// threshold is drawn as a dashed line. Log scale drops non-positive values.
inline std::string mav_svg(const Vector& mav, std::optional<double> threshold,
                           const std::optional<std::vector<bool>>& bbl, bool log_y,
                           std::string_view title = "MAV of NMF weights") {
  using namespace detail;
  const auto L = static_cast<std::size_t>(mav.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double v : mav) {
    if (log_y && !(v > 0.0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (threshold && (!log_y || *threshold > 0.0)) {
    lo = std::min(lo, *threshold);
    hi = std::max(hi, *threshold);
  }
  if (!std::isfinite(lo)) lo = log_y ? 1.0 : 0.0;
  if (!log_y) lo = std::min(lo, 0.0);
  if (!(hi > lo)) hi = log_y ? lo * 10.0 : lo + 1.0;

  const Axis x{1.0, static_cast<double>(std::max<std::size_t>(L, 2)), kMarginLeft, kPlotWidth - kMarginRight, false};
  const Axis y{lo, hi, kPlotHeight - kMarginBottom, kMarginTop, log_y};
  std::ostringstream svg;
  svg << header();
  if (bbl) {
    const double half = (x(2.0) - x(1.0)) / 2.0;
    for (std::size_t j = 0; j < bbl->size() && j < L; ++j)
      if (!(*bbl)[j])
        svg << "<rect x=\"" << num(x(static_cast<double>(j + 1)) - half) << "\" y=\"" << num(kMarginTop)
            << "\" width=\"" << num(2 * half) << "\" height=\"" << num(kPlotHeight - kMarginTop - kMarginBottom)
            << "\" fill=\"#dddddd\"/>\n";
  }
  frame(svg, x, y, title, "band", log_y ? "MAV (log scale)" : "MAV");
  svg << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (std::size_t j = 0; j < L; ++j) {
    const double v = mav[static_cast<Eigen::Index>(j)];
    if (log_y && !(v > 0.0)) continue;
    if (!first) svg << ' ';
    svg << num(x(static_cast<double>(j + 1))) << ',' << num(y(v));
    first = false;
  }
  svg << "\"/>\n";
  if (threshold && (!log_y || *threshold > 0.0))
    svg << "<line x1=\"" << num(x.pixel_lo) << "\" y1=\"" << num(y(*threshold)) << "\" x2=\"" << num(x.pixel_hi)
        << "\" y2=\"" << num(y(*threshold)) << "\" stroke=\"#c0392b\" stroke-dasharray=\"6,4\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

/// Mean selected-band count against M (log axis), one line per threshold.
inline std::string sweep_svg(const SweepResult& sweep, std::string_view title = "Selected bands vs number of targets") {
  using namespace detail;
  static constexpr const char* colors[] = {"#1f4e9c", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50"};
  double mlo = std::numeric_limits<double>::infinity(), mhi = 1.0, chi = 1.0;
  std::vector<double> thresholds;
  for (const SweepSummary& s : sweep.summary) {
    if (!s.runs) continue;
    mlo = std::min(mlo, static_cast<double>(s.targets));
    mhi = std::max(mhi, static_cast<double>(s.targets));
    chi = std::max(chi, static_cast<double>(s.max));
    if (std::find(thresholds.begin(), thresholds.end(), s.threshold) == thresholds.end())
      thresholds.push_back(s.threshold);
  }
  if (!std::isfinite(mlo)) mlo = 1.0;
  if (!(mhi > mlo)) mhi = mlo * 10.0;
  const Axis x{mlo, mhi, kMarginLeft, kPlotWidth - kMarginRight, true};
  const Axis y{0.0, chi, kPlotHeight - kMarginBottom, kMarginTop, false};
  std::ostringstream svg;
  svg << header();
  frame(svg, x, y, title, "number of targets M (log scale)", "selected bands");
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const char* color = colors[t % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const SweepSummary& s : sweep.summary) {
      if (!s.runs || s.threshold != thresholds[t]) continue;
      if (!first) svg << ' ';
      svg << num(x(static_cast<double>(s.targets))) << ',' << num(y(s.mean));
      first = false;
    }
    svg << "\"/>\n";
    for (const SweepSummary& s : sweep.summary) {
      if (!s.runs || s.threshold != thresholds[t]) continue;
      svg << "<line x1=\"" << num(x(static_cast<double>(s.targets))) << "\" y1=\"" << num(y(static_cast<double>(s.min)))
          << "\" x2=\"" << num(x(static_cast<double>(s.targets))) << "\" y2=\"" << num(y(static_cast<double>(s.max)))
          << "\" stroke=\"" << color << "\" stroke-opacity=\"0.5\"/>\n";
    }
    svg << "<text x=\"" << num(kPlotWidth - kMarginRight - 10) << "\" y=\"" << num(kMarginTop + 18 + 16.0 * t)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">thres = " << tick_label(thresholds[t])
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace badband
