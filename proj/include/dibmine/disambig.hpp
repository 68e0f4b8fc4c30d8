#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dibmine/embeddings.hpp"
#include "dibmine/qty_extract.hpp"
#include "dibmine/text.hpp"
#include "dibmine/units.hpp"

// Unit-sense disambiguation: score each candidate unit of an ambiguous
// quantity by the best cosine similarity between the quantity's context
// vector and the vectors of same-dimension peer units, then pick the
// highest-scoring candidate.

namespace dibmine::disambig {

// Sentinel for candidates with no in-vocabulary peer unit; below any
// possible cosine, so flagged candidates always sort last.
inline constexpr double kNoPeerScore = -2.0;

struct CandidateScore {
  units::UnitExpr candidate;
  std::size_t candidate_index = 0;  // position in the quantity's list
  double score = kNoPeerScore;
  std::string best_peer_token;
  bool flagged = false;  // no in-vocabulary peer
};

// Mean input vector of the in-vocabulary tokens within ±window of
// `position`, excluding the position itself. Out-of-vocabulary tokens are
// skipped, not zero-filled. Returns nullopt when no context token is in
// the vocabulary.
inline std::optional<std::vector<float>> context_vector(
    const embed::EmbeddingModel& model, const std::vector<std::string>& tokens,
    std::size_t position, std::uint32_t window = 5) {
  if (position >= tokens.size())
    throw std::out_of_range("context_vector: position out of range");
  const std::size_t lo = position >= window ? position - window : 0;
  const std::size_t hi = std::min(tokens.size(), position + window + 1);
  std::vector<double> acc(model.dim(), 0.0);
  std::size_t used = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == position) continue;
    const auto idx = model.find(tokens[i]);
    if (!idx) continue;
    const auto row = model.input_vector(*idx);
    for (std::uint32_t j = 0; j < model.dim(); ++j) acc[j] += row[j];
    ++used;
  }
  if (used == 0) return std::nullopt;
  std::vector<float> mean(model.dim());
  for (std::uint32_t j = 0; j < model.dim(); ++j)
    mean[j] = static_cast<float>(acc[j] / static_cast<double>(used));
  return mean;
}

// Vocabulary tokens that act as peers for a unit: its lowercased canonical
// name and the single-unit mask form.
inline std::vector<std::string> peer_token_forms(const units::UnitExpr& unit) {
  const std::string name = text::to_lower(unit.canonical_name);
  return {name, "num--" + name};
}

// Scores candidates by the maximum cosine between the context vector and
// any same-dimension peer-unit token in the vocabulary. Peers exclude the
// ambiguous surface form itself. Output is sorted by score descending with
// ties broken by canonical name.
inline std::vector<CandidateScore> score_candidates(
    const embed::EmbeddingModel& model, std::span<const float> context,
    const std::vector<units::UnitExpr>& candidates,
    const units::UnitRegistry& registry, std::string_view surface = {}) {
  const std::string surface_lc = text::to_lower(surface);
  std::vector<CandidateScore> scores;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    CandidateScore cs;
    cs.candidate = candidates[ci];
    cs.candidate_index = ci;
    const auto peers =
        registry.units_of_dimension(candidates[ci].dimension());
    for (const auto& peer : peers) {
      for (const auto& token : peer_token_forms(peer)) {
        if (!surface_lc.empty() && token == surface_lc) continue;
        const auto idx = model.find(token);
        if (!idx) continue;
        double s = 0.0;
        try {
          s = embed::cosine(context, model.input_vector(*idx));
        } catch (const Error&) {
          continue;  // zero vector carries no signal
        }
        if (s > cs.score || cs.best_peer_token.empty()) {
          cs.score = s;
          cs.best_peer_token = token;
        }
      }
    }
    cs.flagged = cs.best_peer_token.empty();
    if (cs.flagged) cs.score = kNoPeerScore;
    scores.push_back(std::move(cs));
  }
  std::sort(scores.begin(), scores.end(),
            [](const CandidateScore& a, const CandidateScore& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.candidate.canonical_name < b.candidate.canonical_name;
            });
  return scores;
}

enum class ResolutionStatus {
  resolved,
  no_context,    // no in-vocabulary token near the mask
  unresolvable,  // every candidate lacked peers
};

struct Resolution {
  ResolutionStatus status = ResolutionStatus::unresolvable;
  std::size_t winner_index = 0;  // into quantity.candidates
  double score = kNoPeerScore;
  std::optional<CandidateScore> runner_up;
  bool tie = false;
  std::string detail;
};

// Resolves an ambiguous quantity in its masked document. The quantity must
// actually be ambiguous; calling this on a resolved quantity is a logic
// error.
inline Resolution disambiguate(const embed::EmbeddingModel& model,
                               const std::vector<std::string>& masked_tokens,
                               std::size_t mask_position,
                               const qty::Quantity& quantity,
                               const units::UnitRegistry& registry,
                               std::uint32_t window = 5) {
  if (quantity.resolved())
    throw std::logic_error("disambiguate: quantity has a resolved unit");
  Resolution res;
  const auto context =
      context_vector(model, masked_tokens, mask_position, window);
  if (!context) {
    res.status = ResolutionStatus::no_context;
    res.detail = "no in-vocabulary context around mask";
    return res;
  }
  std::vector<units::UnitExpr> candidate_units;
  candidate_units.reserve(quantity.candidates.size());
  for (const auto& c : quantity.candidates) candidate_units.push_back(c.unit);
  const auto scores = score_candidates(model, *context, candidate_units,
                                       registry, quantity.unit_surface);
  if (scores.empty() || scores.front().flagged) {
    res.status = ResolutionStatus::unresolvable;
    res.detail = "no candidate has an in-vocabulary peer unit";
    return res;
  }
  res.status = ResolutionStatus::resolved;
  res.winner_index = scores.front().candidate_index;
  res.score = scores.front().score;
  if (scores.size() > 1 && !scores[1].flagged) {
    res.runner_up = scores[1];
    if (scores[1].score == scores.front().score) {
      res.tie = true;
      res.detail = "tie broken by canonical name order";
    }
  }
  return res;
}

}  // namespace dibmine::disambig
