#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dibmine/error.hpp"
#include "dibmine/numeric.hpp"
#include "dibmine/text.hpp"

// Document ingestion, deterministic tokenization, DIB catalog and gold
// annotation files.

namespace dibmine::corpus {

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> tags;
};

struct Token {
  std::string surface;     // verbatim slice of the source text
  std::string normalized;  // lowercased, used as the vocabulary key
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

struct TokenizedDoc {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<Document> documents;
  std::vector<Diagnostic> diagnostics;
};

// One JSON object per line: {"id": ..., "title": ..., "abstract": ...,
// "tags": [...]}. Malformed lines become diagnostics, not aborts.
inline IngestResult ingest_collection_stream(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      result.diagnostics.push_back({line_no, "line " + std::to_string(line_no) +
                                                 ": not a JSON object"});
      continue;
    }
    if (!record.contains("id") || !record["id"].is_string()) {
      result.diagnostics.push_back(
          {line_no, "line " + std::to_string(line_no) + ": missing id"});
      continue;
    }
    Document doc;
    doc.doc_id = record["id"].get<std::string>();
    if (record.contains("title") && record["title"].is_string())
      doc.title = record["title"].get<std::string>();
    if (record.contains("abstract") && record["abstract"].is_string())
      doc.abstract_text = record["abstract"].get<std::string>();
    if (record.contains("tags") && record["tags"].is_array())
      for (const auto& t : record["tags"])
        if (t.is_string()) doc.tags.push_back(t.get<std::string>());
    if (text::trim(doc.abstract_text).empty()) {
      result.diagnostics.push_back(
          {line_no, "line " + std::to_string(line_no) + ": empty abstract"});
      continue;
    }
    if (std::find(seen_ids.begin(), seen_ids.end(), doc.doc_id) !=
        seen_ids.end()) {
      result.diagnostics.push_back({line_no, "line " + std::to_string(line_no) +
                                                 ": duplicate doc id " +
                                                 doc.doc_id});
      continue;
    }
    seen_ids.push_back(doc.doc_id);
    result.documents.push_back(std::move(doc));
  }
  return result;
}

inline IngestResult ingest_collection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  return ingest_collection_stream(in);
}

namespace tokdetail {

struct Chunk {
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

inline std::vector<Chunk> split_chunks(std::string_view s) {
  std::vector<Chunk> chunks;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < s.size()) {
    std::size_t len = 0;
    const char32_t cp = text::decode_utf8(s, i, len);
    if (text::is_separator(cp)) {
      if (start != std::string_view::npos) {
        chunks.push_back({start, i});
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += len;
  }
  if (start != std::string_view::npos) chunks.push_back({start, s.size()});
  return chunks;
}

inline std::size_t first_cp_len(std::string_view s) {
  std::size_t len = 0;
  text::decode_utf8(s, 0, len);
  return len;
}

inline std::size_t last_cp_start(std::string_view s) {
  // Walk back over UTF-8 continuation bytes.
  std::size_t i = s.size();
  do {
    --i;
  } while (i > 0 && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80);
  return i;
}

}  // namespace tokdetail

// Deterministic tokenizer: splits on whitespace (and '~'), detaches leading
// and trailing punctuation into their own tokens, and keeps numeric
// literals glued: decimal points, thousands commas, ± and ×10^ exponents
// stay inside one token. Interior punctuation ("km/s^2", "left-handed")
// never splits a token.
inline TokenizedDoc tokenize(std::string_view doc_text,
                             std::string doc_id = {}) {
  TokenizedDoc doc;
  doc.doc_id = std::move(doc_id);
  doc.text = std::string(doc_text);

  auto emit = [&](std::size_t b, std::size_t e) {
    Token t;
    t.surface = std::string(doc_text.substr(b, e - b));
    t.normalized = text::to_lower(t.surface);
    t.char_start = b;
    t.char_end = e;
    doc.tokens.push_back(std::move(t));
  };

  for (const auto& chunk : tokdetail::split_chunks(doc_text)) {
    std::size_t b = chunk.begin;
    std::size_t e = chunk.end;
    std::vector<std::pair<std::size_t, std::size_t>> trailing;
    while (b < e) {
      const std::string_view core = doc_text.substr(b, e - b);
      if (qty::is_numeric_token(core)) {
        emit(b, e);
        b = e;
        break;
      }
      const std::size_t last = b + tokdetail::last_cp_start(core);
      std::size_t last_len = 0;
      const char32_t back = text::decode_utf8(doc_text, last, last_len);
      if (text::is_punct_cp(back)) {
        trailing.emplace_back(last, e);
        e = last;
        continue;
      }
      std::size_t len = 0;
      const char32_t front = text::decode_utf8(doc_text, b, len);
      if (text::is_punct_cp(front)) {
        emit(b, b + len);
        b += len;
        continue;
      }
      emit(b, e);
      b = e;
      break;
    }
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it)
      emit(it->first, it->second);
  }
  return doc;
}

inline TokenizedDoc tokenize_document(const Document& doc) {
  return tokenize(doc.abstract_text, doc.doc_id);
}

struct GoldAnnotation {
  std::string doc_id;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  double wavelength_nm = 0.0;
  bool is_dib_associated = false;
};

// CSV: doc_id,char_start,char_end,wavelength_nm,is_dib_associated
inline std::vector<GoldAnnotation> load_gold_annotations(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gold annotations: " + path);
  std::vector<GoldAnnotation> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      if (v.find("doc_id") != std::string_view::npos) continue;
    }
    auto fields = text::split(v, ',');
    if (fields.size() != 5)
      throw FormatError("gold row " + std::to_string(line_no) +
                        ": expected 5 fields");
    GoldAnnotation g;
    g.doc_id = std::string(text::trim(fields[0]));
    try {
      g.char_start = std::stoul(std::string(text::trim(fields[1])));
      g.char_end = std::stoul(std::string(text::trim(fields[2])));
      g.wavelength_nm = std::stod(std::string(text::trim(fields[3])));
    } catch (const std::exception&) {
      throw FormatError("gold row " + std::to_string(line_no) +
                        ": non-numeric field");
    }
    const std::string_view flag = text::trim(fields[4]);
    g.is_dib_associated = flag == "1" || flag == "true";
    if (g.wavelength_nm <= 0)
      throw FormatError("gold row " + std::to_string(line_no) +
                        ": wavelength must be positive");
    out.push_back(std::move(g));
  }
  return out;
}

struct DibCatalogEntry {
  double lambda_nm = 0.0;
  double sigma_nm = 0.0;
  std::optional<double> fwhm_nm;

  friend bool operator==(const DibCatalogEntry& a, const DibCatalogEntry& b) {
    return a.lambda_nm == b.lambda_nm && a.sigma_nm == b.sigma_nm &&
           a.fwhm_nm == b.fwhm_nm;
  }
};

struct DibCatalog {
  std::vector<DibCatalogEntry> entries;  // sorted ascending by wavelength
  std::optional<std::pair<double, double>> declared_range_nm;

  std::size_t size() const { return entries.size(); }
};

// CSV with a required header row (wavelength_nm[,sigma_nm[,fwhm_nm]]).
// An optional metadata comment declares the survey range:
//   # range_nm: 320 810
// Entries with no sigma column default to 0.01 nm, the dominant catalog
// uncertainty. Unsorted input is sorted silently.
inline DibCatalog load_dib_catalog_stream(std::istream& in) {
  DibCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  int lambda_col = -1, sigma_col = -1, fwhm_col = -1;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = text::trim(line);
    if (v.empty()) continue;
    if (v[0] == '#') {
      const std::string_view key = "range_nm:";
      std::size_t pos = v.find(key);
      if (pos != std::string_view::npos) {
        std::istringstream rs{std::string(v.substr(pos + key.size()))};
        double lo = 0, hi = 0;
        if (rs >> lo >> hi) catalog.declared_range_nm = {lo, hi};
      }
      continue;
    }
    auto fields = text::split(v, ',');
    if (!header_seen) {
      header_seen = true;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string_view f = text::trim(fields[i]);
        if (f == "wavelength_nm") lambda_col = static_cast<int>(i);
        if (f == "sigma_nm") sigma_col = static_cast<int>(i);
        if (f == "fwhm_nm") fwhm_col = static_cast<int>(i);
      }
      if (lambda_col < 0)
        throw FormatError("catalog header must name wavelength_nm");
      continue;
    }
    DibCatalogEntry entry;
    auto numeric_field = [&](int col) -> std::optional<double> {
      if (col < 0 || static_cast<std::size_t>(col) >= fields.size())
        return std::nullopt;
      const std::string_view f = text::trim(fields[col]);
      if (f.empty()) return std::nullopt;
      std::size_t used = 0;
      double value = 0;
      try {
        value = std::stod(std::string(f), &used);
      } catch (const std::exception&) {
        throw FormatError("catalog row " + std::to_string(line_no) +
                          ": non-numeric field '" + std::string(f) + "'");
      }
      if (used != f.size())
        throw FormatError("catalog row " + std::to_string(line_no) +
                          ": non-numeric field '" + std::string(f) + "'");
      return value;
    };
    const auto lambda = numeric_field(lambda_col);
    if (!lambda)
      throw FormatError("catalog row " + std::to_string(line_no) +
                        ": missing wavelength");
    entry.lambda_nm = *lambda;
    entry.sigma_nm = numeric_field(sigma_col).value_or(0.01);
    entry.fwhm_nm = numeric_field(fwhm_col);
    catalog.entries.push_back(entry);
  }
  std::stable_sort(catalog.entries.begin(), catalog.entries.end(),
                   [](const DibCatalogEntry& a, const DibCatalogEntry& b) {
                     return a.lambda_nm < b.lambda_nm;
                   });
  return catalog;
}

inline DibCatalog load_dib_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog: " + path);
  return load_dib_catalog_stream(in);
}

inline void save_dib_catalog(const DibCatalog& catalog, std::ostream& out) {
  out.precision(17);
  if (catalog.declared_range_nm)
    out << "# range_nm: " << catalog.declared_range_nm->first << " "
        << catalog.declared_range_nm->second << "\n";
  out << "wavelength_nm,sigma_nm,fwhm_nm\n";
  for (const auto& e : catalog.entries) {
    out << e.lambda_nm << "," << e.sigma_nm << ",";
    if (e.fwhm_nm) out << *e.fwhm_nm;
    out << "\n";
  }
}

inline void save_dib_catalog(const DibCatalog& catalog,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write catalog: " + path);
  save_dib_catalog(catalog, out);
}

}  // namespace dibmine::corpus
