#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dibmine/corpus.hpp"
#include "dibmine/disambig.hpp"
#include "dibmine/embeddings.hpp"
#include "dibmine/match_stats.hpp"
#include "dibmine/qty_extract.hpp"
#include "dibmine/units.hpp"

// The three-filter cascade over extracted quantities, the DIB-overlap
// check, and the per-article candidate ranking.

namespace dibmine::pipeline {

enum class FilterId { micron, cooccurrence, similarity };

inline const char* filter_name(FilterId id) {
  switch (id) {
    case FilterId::micron: return "micron";
    case FilterId::cooccurrence: return "cooccurrence";
    case FilterId::similarity: return "similarity";
  }
  return "?";
}

struct FilterDecision {
  std::size_t quantity_index = 0;
  FilterId filter = FilterId::micron;
  bool kept = true;
  std::string detail;
};

enum class ContextMode { window5, sentence };

struct PipelineConfig {
  double similarity_threshold = 0.5;
  std::uint32_t window = 5;
  std::vector<std::string> stoplist{"laser", "light"};
  ContextMode context = ContextMode::window5;
};

// The DIB band region in SI metres (0.1–1 µm), closed on both ends.
inline constexpr double kDibRangeLowM = 1e-7;
inline constexpr double kDibRangeHighM = 1e-6;

inline bool surface_unit_is_micron(const units::UnitExpr& unit) {
  return unit.canonical_name == "micron" ||
         unit.canonical_name == "micrometer";
}

// Filter 1: inside the DIB wavelength range, micron-denominated quantities
// are sizes and distances, not wavelengths; drop them. Quantities with the
// same value written in Å or nm pass.
inline FilterDecision filter_micron(const qty::Quantity& quantity,
                                    std::size_t quantity_index = 0) {
  FilterDecision d;
  d.quantity_index = quantity_index;
  d.filter = FilterId::micron;
  const auto& c = quantity.candidate();
  if (c.unit.dimension() != units::DimensionVector::length()) {
    d.kept = true;
    d.detail = "non-length quantity";
    return d;
  }
  const bool in_range =
      c.value_si >= kDibRangeLowM && c.value_si <= kDibRangeHighM;
  if (in_range && surface_unit_is_micron(c.unit)) {
    d.kept = false;
    d.detail = "micron-denominated value inside 0.1-1 um";
  } else {
    d.kept = true;
  }
  return d;
}

// Filter 2: drop quantities with a stop-list token ("laser", "light")
// within ±window of the mask position. Token equality, not substring.
inline FilterDecision filter_cooccurrence(
    const std::vector<std::string>& masked_tokens, std::size_t mask_position,
    std::size_t quantity_index = 0,
    const std::vector<std::string>& stoplist = {"laser", "light"},
    std::uint32_t window = 5) {
  FilterDecision d;
  d.quantity_index = quantity_index;
  d.filter = FilterId::cooccurrence;
  const std::size_t lo =
      mask_position >= window ? mask_position - window : 0;
  const std::size_t hi =
      std::min(masked_tokens.size(), mask_position + window + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == mask_position) continue;
    const std::string lowered = text::to_lower(masked_tokens[i]);
    if (std::find(stoplist.begin(), stoplist.end(), lowered) !=
        stoplist.end()) {
      d.kept = false;
      d.detail = "co-occurs with '" + lowered + "'";
      return d;
    }
  }
  d.kept = true;
  return d;
}

namespace pipedetail {

inline bool is_sentence_boundary(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

// Window for the similarity filter: either the fixed ±window tokens or the
// enclosing sentence.
inline std::pair<std::size_t, std::size_t> context_bounds(
    const std::vector<std::string>& tokens, std::size_t position,
    std::uint32_t window, ContextMode mode) {
  if (mode == ContextMode::window5) {
    const std::size_t lo = position >= window ? position - window : 0;
    const std::size_t hi = std::min(tokens.size(), position + window + 1);
    return {lo, hi};
  }
  std::size_t lo = position;
  while (lo > 0 && !is_sentence_boundary(tokens[lo - 1])) --lo;
  std::size_t hi = position + 1;
  while (hi < tokens.size() && !is_sentence_boundary(tokens[hi - 1])) ++hi;
  return {lo, hi};
}

}  // namespace pipedetail

// Filter 3: cosine between the quantity's context vector and its mask-token
// vector; scores below the threshold (strictly) are dropped. Quantities
// whose mask token or context is unknown to the model are dropped with a
// diagnostic.
inline FilterDecision filter_similarity(
    const embed::EmbeddingModel& model,
    const std::vector<std::string>& masked_tokens, std::size_t mask_position,
    std::size_t quantity_index = 0, double threshold = 0.5,
    std::uint32_t window = 5, ContextMode mode = ContextMode::window5,
    double* score_out = nullptr) {
  FilterDecision d;
  d.quantity_index = quantity_index;
  d.filter = FilterId::similarity;
  const auto mask_id = model.find(masked_tokens[mask_position]);
  if (!mask_id) {
    d.kept = false;
    d.detail = "mask token not in vocabulary";
    return d;
  }
  const auto [lo, hi] = pipedetail::context_bounds(masked_tokens,
                                                   mask_position, window, mode);
  std::vector<double> acc(model.dim(), 0.0);
  std::size_t used = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == mask_position) continue;
    const auto idx = model.find(masked_tokens[i]);
    if (!idx) continue;
    const auto row = model.input_vector(*idx);
    for (std::uint32_t j = 0; j < model.dim(); ++j) acc[j] += row[j];
    ++used;
  }
  if (used == 0) {
    d.kept = false;
    d.detail = "no context";
    return d;
  }
  std::vector<float> context(model.dim());
  bool degenerate = true;
  for (std::uint32_t j = 0; j < model.dim(); ++j) {
    context[j] = static_cast<float>(acc[j] / static_cast<double>(used));
    if (context[j] != 0.0f) degenerate = false;
  }
  if (degenerate) {
    d.kept = false;
    d.detail = "no context";  // context vectors cancelled out
    return d;
  }
  const double score =
      embed::cosine(context, model.input_vector(*mask_id));
  if (score_out != nullptr) *score_out = score;
  d.kept = score >= threshold;  // strict "< threshold" discards
  d.detail = "score " + std::to_string(score);
  return d;
}

struct SurvivingQuantity {
  std::string doc_id;
  double lambda_nm = 0.0;
  double sigma_nm = 0.0;
  double similarity = 0.0;
  std::string unit;
  std::string raw;
  stats::MatchResult match;
  bool matched = false;
};

struct CandidateArticle {
  std::string doc_id;
  std::vector<SurvivingQuantity> quantities;  // matched quantities only
  double best_similarity = 0.0;
  std::size_t matched_dibs = 0;
};

struct StageCounts {
  std::size_t documents = 0;
  std::size_t extracted = 0;      // quantities out of attach_units
  std::size_t resolved = 0;       // after unit disambiguation
  std::size_t after_micron = 0;
  std::size_t after_cooccurrence = 0;
  std::size_t after_similarity = 0;
  std::size_t matched = 0;        // overlapping a DIB within ±1σ
};

struct PipelineReport {
  std::vector<CandidateArticle> candidates;
  StageCounts funnel;
  std::vector<std::string> diagnostics;
};

// Full cascade: extract → disambiguate → filters 1–3 → DIB overlap →
// group by article → rank. Per-document failures are isolated into
// diagnostics; the pipeline always completes.
inline PipelineReport run_pipeline(const std::vector<corpus::Document>& docs,
                                   const embed::EmbeddingModel& model,
                                   const corpus::DibCatalog& catalog,
                                   const units::UnitRegistry& registry,
                                   const units::AmbiguityTable& ambiguity,
                                   const PipelineConfig& config = {}) {
  PipelineReport report;
  report.funnel.documents = docs.size();
  std::map<std::string, CandidateArticle> by_doc;

  for (const auto& doc : docs) {
    try {
      qty::ExtractedDoc extracted =
          qty::extract_document(doc, registry, ambiguity);
      report.funnel.extracted += extracted.masked.mask_positions.size();
      for (const auto& [q_index, mask_pos] : extracted.masked.mask_positions) {
        const qty::Quantity& q = extracted.quantities[q_index];
        std::size_t candidate_index = 0;
        double similarity = 0.0;
        if (!q.resolved()) {
          const auto resolution =
              disambig::disambiguate(model, extracted.masked.tokens, mask_pos,
                                     q, registry, config.window);
          if (resolution.status != disambig::ResolutionStatus::resolved) {
            report.diagnostics.push_back(doc.doc_id + ": '" + q.literal.raw +
                                         "' unresolved (" + resolution.detail +
                                         ")");
            continue;
          }
          candidate_index = resolution.winner_index;
        }
        ++report.funnel.resolved;
        const qty::QuantityCandidate& chosen = q.candidates[candidate_index];

        qty::Quantity resolved_q = q;
        resolved_q.candidates = {chosen};
        if (!filter_micron(resolved_q, q_index).kept) continue;
        ++report.funnel.after_micron;

        if (!filter_cooccurrence(extracted.masked.tokens, mask_pos, q_index,
                                 config.stoplist, config.window)
                 .kept)
          continue;
        ++report.funnel.after_cooccurrence;

        const FilterDecision sim = filter_similarity(
            model, extracted.masked.tokens, mask_pos, q_index,
            config.similarity_threshold, config.window, config.context,
            &similarity);
        if (!sim.kept) {
          if (sim.detail == "no context" ||
              sim.detail == "mask token not in vocabulary")
            report.diagnostics.push_back(doc.doc_id + ": '" + q.literal.raw +
                                         "' dropped: " + sim.detail);
          continue;
        }
        ++report.funnel.after_similarity;

        // DIB overlap: only wavelength-like (length) quantities can match.
        if (chosen.unit.dimension() != units::DimensionVector::length())
          continue;
        SurvivingQuantity sq;
        sq.doc_id = doc.doc_id;
        sq.lambda_nm = chosen.value_si * 1e9;
        sq.sigma_nm = chosen.sigma_si * 1e9;
        sq.similarity = similarity;
        sq.unit = chosen.unit.canonical_name;
        sq.raw = q.literal.raw;
        sq.match = stats::closest_dib(catalog, sq.lambda_nm, sq.sigma_nm);
        sq.matched = sq.match.within_sigma;
        if (!sq.matched) continue;
        ++report.funnel.matched;

        CandidateArticle& article = by_doc[doc.doc_id];
        article.doc_id = doc.doc_id;
        article.best_similarity =
            std::max(article.best_similarity, sq.similarity);
        article.quantities.push_back(std::move(sq));
        article.matched_dibs = article.quantities.size();
      }
    } catch (const std::exception& e) {
      report.diagnostics.push_back(doc.doc_id + ": " + e.what());
    }
  }

  for (auto& [id, article] : by_doc)
    report.candidates.push_back(std::move(article));
  std::sort(report.candidates.begin(), report.candidates.end(),
            [](const CandidateArticle& a, const CandidateArticle& b) {
              if (a.matched_dibs != b.matched_dibs)
                return a.matched_dibs > b.matched_dibs;
              if (a.best_similarity != b.best_similarity)
                return a.best_similarity > b.best_similarity;
              return a.doc_id < b.doc_id;
            });
  return report;
}

inline nlohmann::json candidate_to_json(const CandidateArticle& article) {
  nlohmann::json j;
  j["doc_id"] = article.doc_id;
  j["matched_dibs"] = article.matched_dibs;
  j["best_similarity"] = article.best_similarity;
  nlohmann::json quantities = nlohmann::json::array();
  for (const auto& q : article.quantities)
    quantities.push_back({{"raw", q.raw},
                          {"lambda_nm", q.lambda_nm},
                          {"sigma_nm", q.sigma_nm},
                          {"unit", q.unit},
                          {"similarity", q.similarity},
                          {"closest_dib_nm", q.match.closest.lambda_nm},
                          {"delta_nm", q.match.delta_nm}});
  j["quantities"] = std::move(quantities);
  return j;
}

inline nlohmann::json funnel_to_json(const StageCounts& funnel) {
  return {{"documents", funnel.documents},
          {"extracted", funnel.extracted},
          {"resolved", funnel.resolved},
          {"after_micron", funnel.after_micron},
          {"after_cooccurrence", funnel.after_cooccurrence},
          {"after_similarity", funnel.after_similarity},
          {"matched", funnel.matched}};
}

}  // namespace dibmine::pipeline
