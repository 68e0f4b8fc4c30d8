#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dibmine/corpus.hpp"
#include "dibmine/error.hpp"
#include "dibmine/numeric.hpp"
#include "dibmine/units.hpp"

// Quantity recognition: scan tokens for numeric literals, attach trailing
// units, infer missing uncertainties, and mask recognized quantities in the
// token stream for the embedding pipeline.

namespace dibmine::qty {

// One interpretation of a quantity under a specific unit. Resolved
// quantities have exactly one candidate; ambiguous ones carry all of them
// in ambiguity-table order.
struct QuantityCandidate {
  units::UnitExpr unit;
  double value_si = 0.0;
  double sigma_si = 0.0;
};

struct Quantity {
  std::string doc_id;
  NumericLiteral literal;
  std::string unit_surface;
  std::size_t token_first = 0;  // literal token index in the source stream
  std::size_t token_count = 0;  // literal + unit tokens covered by the mask
  std::vector<QuantityCandidate> candidates;

  bool resolved() const { return candidates.size() == 1; }
  const QuantityCandidate& candidate() const { return candidates.front(); }
  std::size_t char_start() const { return literal.char_start; }

  std::string mask_token() const {
    std::string mask = "NUM";
    for (const auto& c : candidates) mask += "--" + c.unit.mask_name();
    return mask;
  }
};

// Finds every numeric literal in the token stream. Identifier-bound digits
// ("349A") never tokenize as standalone numbers, so no extra rejection pass
// is needed here.
inline std::vector<NumericLiteral> scan_numbers(const corpus::TokenizedDoc& doc) {
  std::vector<NumericLiteral> literals;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const auto& tok = doc.tokens[i];
    auto lit = parse_numeric_literal(tok.surface);
    if (!lit) continue;
    lit->char_start = tok.char_start;
    lit->char_end = tok.char_end;
    lit->token_index = i;
    literals.push_back(std::move(*lit));
  }
  return literals;
}

// σ for a literal without an explicit uncertainty: one unit in the decimal
// place of the mantissa's last written digit (488 → 1, 545.4 → 0.1),
// carried through the ×10^k exponent.
inline double infer_sigma_value(const NumericLiteral& lit) {
  if (lit.uncertainty) return *lit.uncertainty;
  return NumericLiteral::scaled(1, lit.exponent10 - lit.shift);
}

struct AttachOptions {
  std::size_t window = 2;  // unit must appear within this many tokens
};

struct ExtractionStats {
  std::size_t literals = 0;
  std::size_t unitless = 0;
  std::size_t quantities = 0;
  std::vector<std::string> conflicts;  // overlapping-span reports
};

namespace extdetail {

inline bool is_closing_bracket(std::string_view s) {
  return s == ")" || s == "]" || s == "}";
}

}  // namespace extdetail

// Pairs literals with a unit in the following tokens. The unit must sit in
// the token right after the literal, or one further when a closing bracket
// intervenes. Ambiguous surfaces keep every candidate interpretation.
inline std::vector<Quantity> attach_units(
    const std::vector<NumericLiteral>& literals,
    const corpus::TokenizedDoc& doc, const units::UnitRegistry& registry,
    const units::AmbiguityTable& ambiguity, ExtractionStats* stats = nullptr,
    const AttachOptions& options = {}) {
  std::vector<Quantity> quantities;
  if (stats) stats->literals += literals.size();
  for (const auto& lit : literals) {
    std::size_t unit_index = 0;
    units::UnitParse parsed;
    for (std::size_t offset = 1; offset <= options.window; ++offset) {
      const std::size_t idx = lit.token_index + offset;
      if (idx >= doc.tokens.size()) break;
      // Only a closing bracket may stand between the number and its unit.
      if (offset > 1 &&
          !extdetail::is_closing_bracket(doc.tokens[idx - 1].surface))
        break;
      parsed = units::parse_unit(doc.tokens[idx].surface, registry, &ambiguity);
      if (parsed.is_unit()) {
        unit_index = idx;
        break;
      }
    }
    if (!parsed.is_unit()) {
      if (stats) ++stats->unitless;
      continue;
    }
    Quantity q;
    q.doc_id = doc.doc_id;
    q.literal = lit;
    q.unit_surface = doc.tokens[unit_index].surface;
    q.token_first = lit.token_index;
    q.token_count = unit_index - lit.token_index + 1;
    const double value = lit.value();
    const double sigma = infer_sigma_value(lit);
    auto add_candidate = [&](const units::UnitExpr& unit) {
      QuantityCandidate c;
      c.unit = unit;
      c.value_si = value * unit.si_scale;
      c.sigma_si = std::abs(sigma) * unit.si_scale;
      q.candidates.push_back(std::move(c));
    };
    if (parsed.kind == units::UnitParseKind::resolved) {
      add_candidate(parsed.unit);
    } else {
      for (const auto& u : parsed.candidates) add_candidate(u);
    }
    quantities.push_back(std::move(q));
  }
  if (stats) stats->quantities += quantities.size();
  return quantities;
}

struct MaskedDoc {
  std::string doc_id;
  std::vector<std::string> tokens;  // normalized stream with masks inserted
  // Position of each surviving quantity's mask token, paired with its index
  // into the quantity list passed to mask_document.
  std::vector<std::pair<std::size_t, std::size_t>> mask_positions;
};

// Replaces each quantity's literal+unit token span with a single mask token
// ("NUM--Nanometer", "NUM--Angstrom--Ampere"). Overlapping spans keep the
// longest quantity; the loser is dropped with a conflict report.
inline MaskedDoc mask_document(const corpus::TokenizedDoc& doc,
                               const std::vector<Quantity>& quantities,
                               ExtractionStats* stats = nullptr) {
  struct SpanRef {
    std::size_t first;
    std::size_t count;
    std::size_t index;
  };
  std::vector<SpanRef> spans;
  spans.reserve(quantities.size());
  for (std::size_t i = 0; i < quantities.size(); ++i)
    spans.push_back({quantities[i].token_first, quantities[i].token_count, i});
  std::sort(spans.begin(), spans.end(), [](const SpanRef& a, const SpanRef& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.count > b.count;
  });
  std::vector<SpanRef> kept;
  for (const auto& s : spans) {
    if (!kept.empty() && s.first < kept.back().first + kept.back().count) {
      if (s.count > kept.back().count) kept.back() = s;
      if (stats)
        stats->conflicts.push_back(
            "overlapping quantity spans in " + doc.doc_id +
            "; keeping longest at token " + std::to_string(kept.back().first));
      continue;
    }
    kept.push_back(s);
  }

  MaskedDoc masked;
  masked.doc_id = doc.doc_id;
  std::size_t next_span = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (next_span < kept.size() && kept[next_span].first == i) {
      const Quantity& q = quantities[kept[next_span].index];
      masked.mask_positions.emplace_back(kept[next_span].index,
                                         masked.tokens.size());
      masked.tokens.push_back(text::to_lower(q.mask_token()));
      i += kept[next_span].count - 1;
      ++next_span;
      continue;
    }
    masked.tokens.push_back(doc.tokens[i].normalized);
  }
  std::sort(masked.mask_positions.begin(), masked.mask_positions.end());
  return masked;
}

struct ExtractedDoc {
  corpus::TokenizedDoc tokenized;
  std::vector<Quantity> quantities;
  MaskedDoc masked;
};

// Tokenize → scan → attach → mask for one document.
inline ExtractedDoc extract_document(const corpus::Document& doc,
                                     const units::UnitRegistry& registry,
                                     const units::AmbiguityTable& ambiguity,
                                     ExtractionStats* stats = nullptr) {
  ExtractedDoc out;
  out.tokenized = corpus::tokenize_document(doc);
  out.quantities =
      attach_units(scan_numbers(out.tokenized), out.tokenized, registry,
                   ambiguity, stats);
  out.masked = mask_document(out.tokenized, out.quantities, stats);
  return out;
}

// Masked, normalized token streams for embedding training.
inline std::vector<std::vector<std::string>> build_masked_corpus(
    const std::vector<corpus::Document>& docs,
    const units::UnitRegistry& registry,
    const units::AmbiguityTable& ambiguity,
    ExtractionStats* stats = nullptr) {
  std::vector<std::vector<std::string>> streams;
  streams.reserve(docs.size());
  for (const auto& doc : docs)
    streams.push_back(
        extract_document(doc, registry, ambiguity, stats).masked.tokens);
  return streams;
}

// JSON-lines record for one extracted quantity; the pipeline's intermediate
// format.
inline nlohmann::json quantity_to_json(const Quantity& q) {
  nlohmann::json record;
  record["doc_id"] = q.doc_id;
  record["span"] = {q.literal.char_start, q.literal.char_end};
  record["raw"] = q.literal.raw;
  record["unit_surface"] = q.unit_surface;
  if (q.resolved()) {
    record["unit"] = q.candidate().unit.canonical_name;
    record["value_si"] = q.candidate().value_si;
    record["sigma_si"] = q.candidate().sigma_si;
  } else {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : q.candidates)
      candidates.push_back({{"unit", c.unit.canonical_name},
                            {"value_si", c.value_si},
                            {"sigma_si", c.sigma_si}});
    record["candidates"] = std::move(candidates);
  }
  return record;
}

}  // namespace dibmine::qty
