#include <catch2/catch.hpp>

#include <sstream>

#include "dibmine/svg_plot.hpp"

using namespace dibmine;
using namespace dibmine::plot;

namespace {
std::size_t count_occurrences(const std::string& haystack,
                              const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::size_t csv_rows(const std::string& csv) {
  std::size_t lines = 0;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  return lines - 1;  // header
}
}  // namespace

TEST_CASE("one band plus one quantity renders one rect and one marker") {
  corpus::DibCatalog catalog;
  catalog.entries = {{500.0, 0.01, 2.0}};
  std::ostringstream svg, csv;
  const auto result = render_spectrum(catalog, {500.3}, svg, csv);
  CHECK(result.bands == 1);
  CHECK(result.markers == 1);
  CHECK(count_occurrences(svg.str(), "<rect") == 1);
  CHECK(count_occurrences(svg.str(), "class=\"marker\"") == 1);
  CHECK(csv_rows(csv.str()) == 2);
}

TEST_CASE("empty inputs give an axis-only svg") {
  corpus::DibCatalog catalog;
  catalog.declared_range_nm = {{320.0, 810.0}};
  std::ostringstream svg, csv;
  const auto result = render_spectrum(catalog, {}, svg, csv);
  CHECK(result.bands == 0);
  CHECK(result.markers == 0);
  CHECK(count_occurrences(svg.str(), "<rect") == 0);
  CHECK(svg.str().find("<line") != std::string::npos);
  CHECK(csv_rows(csv.str()) == 0);
}

TEST_CASE("csv row count is bands plus quantities") {
  corpus::DibCatalog catalog;
  for (int i = 0; i < 12; ++i)
    catalog.entries.push_back({400.0 + 10 * i, 0.01, 1.0 + 0.1 * i});
  catalog.declared_range_nm = {{320.0, 810.0}};
  std::ostringstream svg, csv;
  const auto result =
      render_spectrum(catalog, {404.0, 451.0, 488.0, 503.5}, svg, csv);
  CHECK(result.bands == 12);
  CHECK(result.markers == 4);
  CHECK(csv_rows(csv.str()) == 16);
}

TEST_CASE("missing fwhm falls back to the default width with a warning") {
  corpus::DibCatalog catalog;
  catalog.entries = {{500.0, 0.01, {}}};
  std::ostringstream svg, csv;
  const auto result = render_spectrum(catalog, {}, svg, csv);
  CHECK(result.missing_fwhm);
  CHECK(csv.str().find("band,500,0.1") != std::string::npos);
}

TEST_CASE("rendering is byte-stable") {
  corpus::DibCatalog catalog;
  catalog.entries = {{500.0, 0.01, 2.0}, {600.0, 0.01, 1.0}};
  std::ostringstream svg1, csv1, svg2, csv2;
  render_spectrum(catalog, {555.0}, svg1, csv1);
  render_spectrum(catalog, {555.0}, svg2, csv2);
  CHECK(svg1.str() == svg2.str());
  CHECK(csv1.str() == csv2.str());
}
