#include <catch2/catch.hpp>

#include <sstream>

#include "dibmine/corpus.hpp"

using namespace dibmine;
using namespace dibmine::corpus;

namespace {
const std::string kFixtures = DIBMINE_FIXTURE_DIR;

std::vector<std::string> surfaces(const TokenizedDoc& doc) {
  std::vector<std::string> out;
  for (const auto& t : doc.tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::string> normalized(const TokenizedDoc& doc) {
  std::vector<std::string> out;
  for (const auto& t : doc.tokens) out.push_back(t.normalized);
  return out;
}
}  // namespace

TEST_CASE("ingest keeps well-formed records") {
  const auto result = ingest_collection(kFixtures + "/corpus_small.jsonl");
  REQUIRE(result.documents.size() == 3);
  CHECK(result.diagnostics.empty());
  CHECK(result.documents[0].doc_id == "d1");
  CHECK(result.documents[1].tags.size() == 2);
}

TEST_CASE("ingest reports malformed lines with their line number") {
  const auto result = ingest_collection(kFixtures + "/corpus_malformed.jsonl");
  CHECK(result.documents.size() == 2);
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].line == 2);
  CHECK(result.diagnostics[0].message.find("2") != std::string::npos);
}

TEST_CASE("ingest edge cases") {
  std::istringstream empty("");
  CHECK(ingest_collection_stream(empty).documents.empty());
  CHECK(ingest_collection_stream(empty).diagnostics.empty());

  std::istringstream blank_abstract(
      "{\"id\":\"x\",\"abstract\":\"   \"}\n");
  const auto r = ingest_collection_stream(blank_abstract);
  CHECK(r.documents.empty());
  REQUIRE(r.diagnostics.size() == 1);

  std::istringstream dup(
      "{\"id\":\"x\",\"abstract\":\"one\"}\n"
      "{\"id\":\"x\",\"abstract\":\"two\"}\n");
  const auto d = ingest_collection_stream(dup);
  CHECK(d.documents.size() == 1);
  CHECK(d.diagnostics.size() == 1);

  CHECK_THROWS_AS(ingest_collection("/nonexistent/corpus.jsonl"), IoError);
}

TEST_CASE("tokenizer keeps star names intact") {
  const auto doc = tokenize("MWC 349A is a star");
  CHECK(normalized(doc) ==
        std::vector<std::string>{"mwc", "349a", "is", "a", "star"});
  CHECK(surfaces(doc) ==
        std::vector<std::string>{"MWC", "349A", "is", "a", "star"});
  for (const auto& t : doc.tokens)
    CHECK(doc.text.substr(t.char_start, t.char_end - t.char_start) ==
          t.surface);
}

TEST_CASE("tokenizer keeps numeric literals glued") {
  const auto doc = tokenize("(28.4±0.1)×10^3");
  REQUIRE(doc.tokens.size() == 1);
  CHECK(doc.tokens[0].surface == "(28.4±0.1)×10^3");

  const auto trailing = tokenize("value (28.4±0.1)×10^3, rest");
  REQUIRE(trailing.tokens.size() == 4);
  CHECK(trailing.tokens[1].surface == "(28.4±0.1)×10^3");
  CHECK(trailing.tokens[2].surface == ",");

  const auto thousands = tokenize("28,400 units.");
  CHECK(surfaces(thousands) ==
        std::vector<std::string>{"28,400", "units", "."});
}

TEST_CASE("tokenizer detaches punctuation but not interior marks") {
  const auto doc = tokenize("speeds (km/s^2), i.e. \"fast\"");
  CHECK(surfaces(doc) == std::vector<std::string>{"speeds", "(", "km/s^2",
                                                  ")", ",", "i.e", ".", "\"",
                                                  "fast", "\""});
}

TEST_CASE("tokenizer treats tilde as whitespace") {
  const auto doc = tokenize("1500~Å in");
  CHECK(surfaces(doc) == std::vector<std::string>{"1500", "Å", "in"});
}

TEST_CASE("tokenizer empty input") {
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("   \t\n").tokens.empty());
}

TEST_CASE("tokenizer spans are strictly increasing and verbatim") {
  const char* sample =
      "Peaks at 425, 453, and 563 nm (±1σ) were reported; MWC~349A was not.";
  const auto doc = tokenize(sample);
  std::size_t prev_end = 0;
  for (const auto& t : doc.tokens) {
    CHECK(t.char_start >= prev_end);
    CHECK(t.char_end > t.char_start);
    prev_end = t.char_end;
    CHECK(doc.text.substr(t.char_start, t.char_end - t.char_start) ==
          t.surface);
  }
}

TEST_CASE("tokenize is idempotent over its own detokenization") {
  const char* samples[] = {
      "MWC 349A is a star",
      "Peaks at (28.4±0.1)×10^3 and 28,400 were seen.",
      "The dye emits at 488 nm when pumped, a value close to argon lines.",
      "wavelengths of 1500~Å (0.15 µm) dominate",
  };
  for (const char* sample : samples) {
    const auto first = tokenize(sample);
    std::string joined;
    for (const auto& t : first.tokens) {
      if (!joined.empty()) joined += ' ';
      joined += t.surface;
    }
    const auto second = tokenize(joined);
    CHECK(surfaces(first) == surfaces(second));
  }
}

TEST_CASE("catalog loads sorted with range metadata") {
  const auto catalog = load_dib_catalog(kFixtures + "/catalog_380.csv");
  REQUIRE(catalog.size() == 380);
  REQUIRE(catalog.declared_range_nm.has_value());
  CHECK(catalog.declared_range_nm->first == 320.0);
  CHECK(catalog.declared_range_nm->second == 810.0);
  CHECK(catalog.entries.front().lambda_nm >= 320.0);
  CHECK(catalog.entries.back().lambda_nm <= 810.0);
  CHECK(std::is_sorted(catalog.entries.begin(), catalog.entries.end(),
                       [](const auto& a, const auto& b) {
                         return a.lambda_nm < b.lambda_nm;
                       }));
}

TEST_CASE("catalog single row and shuffled input") {
  std::istringstream single("wavelength_nm,sigma_nm\n500.1,0.5\n");
  const auto one = load_dib_catalog_stream(single);
  REQUIRE(one.size() == 1);
  CHECK(one.entries[0].lambda_nm == 500.1);

  std::istringstream shuffled(
      "wavelength_nm\n505\n501\n509\n503\n507\n502\n508\n504\n506\n500\n");
  const auto sorted = load_dib_catalog_stream(shuffled);
  REQUIRE(sorted.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(sorted.entries[i].lambda_nm == 500.0 + i);
    CHECK(sorted.entries[i].sigma_nm == 0.01);  // default
  }
}

TEST_CASE("catalog rejects non-numeric rows naming the row") {
  std::istringstream bad("wavelength_nm,sigma_nm\n500,0.1\nxyz,0.1\n");
  try {
    load_dib_catalog_stream(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("catalog serialization round-trips") {
  const auto catalog = load_dib_catalog(kFixtures + "/catalog_table3.csv");
  std::ostringstream out;
  save_dib_catalog(catalog, out);
  std::istringstream in(out.str());
  const auto reloaded = load_dib_catalog_stream(in);
  REQUIRE(reloaded.size() == catalog.size());
  CHECK(reloaded.declared_range_nm == catalog.declared_range_nm);
  for (std::size_t i = 0; i < catalog.size(); ++i)
    CHECK(reloaded.entries[i] == catalog.entries[i]);
}

TEST_CASE("gold annotations load") {
  const auto gold = load_gold_annotations(kFixtures + "/gold_small.csv");
  REQUIRE(gold.size() == 3);
  CHECK(gold[0].doc_id == "g1");
  CHECK(gold[0].char_start == 17);
  CHECK(gold[0].wavelength_nm == Approx(442.8));
  CHECK(gold[0].is_dib_associated);
  CHECK_FALSE(gold[2].is_dib_associated);
}
