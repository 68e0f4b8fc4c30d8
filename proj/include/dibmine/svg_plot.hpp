#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "dibmine/corpus.hpp"

// Spectrum rendering: DIB bands as shaded rectangles (centroid ± FWHM/2)
// and matched quantities as cross markers at deterministic y jitter. SVG
// keeps the artifact dependency-free and diffable.

namespace dibmine::plot {

struct PlotOptions {
  double width = 1000;
  double height = 280;
  double margin = 45;
  double default_band_width_nm = 0.1;  // when the catalog has no FWHM
};

struct PlotResult {
  std::size_t bands = 0;
  std::size_t markers = 0;
  bool missing_fwhm = false;  // some band used the default width
};

namespace plotdetail {

inline std::string num(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.3f", v);
  return buffer;
}

// Deterministic jitter in (0, 1): golden-ratio low-discrepancy sequence.
inline double jitter(std::size_t index) {
  const double x = 0.6180339887498949 * static_cast<double>(index + 1);
  return 0.15 + 0.7 * (x - std::floor(x));
}

}  // namespace plotdetail

// Writes the SVG and a CSV of plotted coordinates (one row per band and
// per marker). Returns the element counts.
inline PlotResult render_spectrum(const corpus::DibCatalog& catalog,
                                  const std::vector<double>& quantities_nm,
                                  std::ostream& svg, std::ostream& csv,
                                  const PlotOptions& options = {}) {
  using plotdetail::jitter;
  using plotdetail::num;
  PlotResult result;

  double lo = 1e300, hi = -1e300;
  if (catalog.declared_range_nm) {
    lo = catalog.declared_range_nm->first;
    hi = catalog.declared_range_nm->second;
  }
  for (const auto& e : catalog.entries) {
    lo = std::min(lo, e.lambda_nm - e.fwhm_nm.value_or(options.default_band_width_nm));
    hi = std::max(hi, e.lambda_nm + e.fwhm_nm.value_or(options.default_band_width_nm));
  }
  for (double q : quantities_nm) {
    lo = std::min(lo, q - 1);
    hi = std::max(hi, q + 1);
  }
  if (lo > hi) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }

  const double plot_w = options.width - 2 * options.margin;
  const double plot_h = options.height - 2 * options.margin;
  auto x_of = [&](double nm) {
    return options.margin + (nm - lo) / (hi - lo) * plot_w;
  };

  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << num(options.width) << "\" height=\"" << num(options.height)
      << "\" viewBox=\"0 0 " << num(options.width) << " "
      << num(options.height)
      << "\" style=\"background-color:white\">\n";
  // Axis with min/mid/max wavelength labels.
  const double axis_y = options.height - options.margin;
  svg << "<line x1=\"" << num(options.margin) << "\" y1=\"" << num(axis_y)
      << "\" x2=\"" << num(options.width - options.margin) << "\" y2=\""
      << num(axis_y) << "\" stroke=\"black\"/>\n";
  for (double t : {lo, (lo + hi) / 2, hi}) {
    svg << "<line x1=\"" << num(x_of(t)) << "\" y1=\"" << num(axis_y)
        << "\" x2=\"" << num(x_of(t)) << "\" y2=\"" << num(axis_y + 5)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x_of(t)) << "\" y=\"" << num(axis_y + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << num(t)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(options.width / 2) << "\" y=\""
      << num(options.height - 6)
      << "\" font-size=\"12\" text-anchor=\"middle\">wavelength [nm]"
      << "</text>\n";

  csv << "kind,lambda_nm,width_nm,y\n";
  for (const auto& e : catalog.entries) {
    double width_nm = options.default_band_width_nm;
    if (e.fwhm_nm) {
      width_nm = *e.fwhm_nm;
    } else {
      result.missing_fwhm = true;
    }
    const double x0 = x_of(e.lambda_nm - width_nm / 2);
    const double x1 = x_of(e.lambda_nm + width_nm / 2);
    svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(options.margin)
        << "\" width=\"" << num(std::max(0.5, x1 - x0)) << "\" height=\""
        << num(plot_h) << "\" fill=\"#7aa6d6\" fill-opacity=\"0.55\"/>\n";
    csv << "band," << e.lambda_nm << "," << width_nm << ",\n";
    ++result.bands;
  }
  for (std::size_t i = 0; i < quantities_nm.size(); ++i) {
    const double x = x_of(quantities_nm[i]);
    const double y = options.margin + jitter(i) * plot_h;
    const double r = 4;
    svg << "<path d=\"M " << num(x - r) << " " << num(y - r) << " L "
        << num(x + r) << " " << num(y + r) << " M " << num(x - r) << " "
        << num(y + r) << " L " << num(x + r) << " " << num(y - r)
        << "\" stroke=\"#c1301c\" stroke-width=\"1.5\" class=\"marker\"/>\n";
    csv << "quantity," << quantities_nm[i] << ",," << jitter(i) << "\n";
    ++result.markers;
  }
  svg << "</svg>\n";
  return result;
}

}  // namespace dibmine::plot
