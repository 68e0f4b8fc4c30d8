#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dibmine/corpus.hpp"
#include "dibmine/error.hpp"

// Wavelength matching against the DIB catalog and the match-significance
// statistics: band density, the Poisson window probability, joint
// probabilities over several bands, and the span-overlap evaluation report.

namespace dibmine::stats {

struct MatchResult {
  double query_lambda_nm = 0.0;
  double query_sigma_nm = 0.0;
  corpus::DibCatalogEntry closest;
  double delta_nm = 0.0;
  bool within_sigma = false;
};

// Nearest catalog band by binary search over the sorted entries. Equal
// distances resolve to the lower wavelength.
inline MatchResult closest_dib(const corpus::DibCatalog& catalog,
                               double lambda_nm, double sigma_nm = 1.0) {
  if (catalog.entries.empty())
    throw Error("closest_dib: empty catalog");
  const auto& entries = catalog.entries;
  auto it = std::lower_bound(
      entries.begin(), entries.end(), lambda_nm,
      [](const corpus::DibCatalogEntry& e, double v) { return e.lambda_nm < v; });
  const corpus::DibCatalogEntry* best = nullptr;
  if (it != entries.end()) best = &*it;
  if (it != entries.begin()) {
    const corpus::DibCatalogEntry* lower = &*(it - 1);
    // "<=" keeps the lower wavelength on exact-distance ties.
    if (best == nullptr ||
        std::abs(lower->lambda_nm - lambda_nm) <=
            std::abs(best->lambda_nm - lambda_nm))
      best = lower;
  }
  MatchResult result;
  result.query_lambda_nm = lambda_nm;
  result.query_sigma_nm = sigma_nm;
  result.closest = *best;
  result.delta_nm = std::abs(best->lambda_nm - lambda_nm);
  result.within_sigma = result.delta_nm <= sigma_nm;
  return result;
}

// Bands per nanometre over the declared catalog range.
inline double dib_density(const corpus::DibCatalog& catalog) {
  if (!catalog.declared_range_nm)
    throw Error("dib_density: catalog range not declared");
  const double width =
      catalog.declared_range_nm->second - catalog.declared_range_nm->first;
  if (width <= 0) throw Error("dib_density: zero-width catalog range");
  return static_cast<double>(catalog.entries.size()) / width;
}

// Probability of at least one band inside ±sigma under a uniform Poisson
// model with the given per-nm density: 1 − exp(−2·σ·density).
inline double poisson_match_prob(double density_per_nm, double sigma_nm) {
  return -std::expm1(-2.0 * sigma_nm * density_per_nm);
}

// Joint probability that every band in the list has a match within its own
// ±σ, assuming independence: the product of the per-band Poisson window
// probabilities.
inline double joint_match_prob(double density_per_nm,
                               const std::vector<double>& sigmas_nm) {
  if (sigmas_nm.empty()) throw Error("joint_match_prob: empty sigma list");
  double p = 1.0;
  for (double sigma : sigmas_nm) {
    if (!(sigma > 0)) throw Error("joint_match_prob: sigma must be positive");
    p *= poisson_match_prob(density_per_nm, sigma);
  }
  return p;
}

// Short label for the null model so reports state what the number means.
inline const char* joint_match_model() { return "poisson-product"; }

struct MatchFraction {
  std::size_t total = 0;
  std::size_t within = 0;
  double fraction_within = 0.0;
  double fraction_missed = 0.0;
};

inline MatchFraction match_fraction(const std::vector<MatchResult>& results) {
  MatchFraction f;
  f.total = results.size();
  if (results.empty()) return f;
  for (const auto& r : results)
    if (r.within_sigma) ++f.within;
  f.fraction_within = static_cast<double>(f.within) / f.total;
  f.fraction_missed = 1.0 - f.fraction_within;
  return f;
}

struct Span {
  std::string doc_id;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

struct EvalReport {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_defined = true;  // false when there were no predictions

  static EvalReport from_counts(std::uint64_t tp, std::uint64_t fp,
                                std::uint64_t fn) {
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision_defined = tp + fp > 0;
    r.precision =
        r.precision_defined ? static_cast<double>(tp) / (tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return r;
  }

  std::string summary() const {
    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "precision %llu/%llu = %.1f%%%s\nrecall %llu/%llu = %.1f%%",
                  static_cast<unsigned long long>(tp),
                  static_cast<unsigned long long>(tp + fp), precision * 100.0,
                  precision_defined ? "" : " (no predictions)",
                  static_cast<unsigned long long>(tp),
                  static_cast<unsigned long long>(tp + fn), recall * 100.0);
    return buffer;
  }
};

namespace evaldetail {

inline std::size_t overlap_length(const Span& a, const Span& b) {
  if (a.doc_id != b.doc_id) return 0;
  const std::size_t lo = std::max(a.char_start, b.char_start);
  const std::size_t hi = std::min(a.char_end, b.char_end);
  return hi > lo ? hi - lo : 0;
}

}  // namespace evaldetail

// One-to-one greedy matching, longest overlap first: each gold span is
// consumed by at most one prediction and vice versa.
inline EvalReport precision_recall(const std::vector<Span>& predicted,
                                   const std::vector<Span>& gold) {
  struct Pair {
    std::size_t pred;
    std::size_t gold;
    std::size_t overlap;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < predicted.size(); ++p)
    for (std::size_t g = 0; g < gold.size(); ++g) {
      const std::size_t ov = evaldetail::overlap_length(predicted[p], gold[g]);
      if (ov > 0) pairs.push_back({p, g, ov});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gold < b.gold;
  });
  std::vector<bool> pred_used(predicted.size(), false);
  std::vector<bool> gold_used(gold.size(), false);
  std::uint64_t tp = 0;
  for (const auto& pair : pairs) {
    if (pred_used[pair.pred] || gold_used[pair.gold]) continue;
    pred_used[pair.pred] = true;
    gold_used[pair.gold] = true;
    ++tp;
  }
  return EvalReport::from_counts(tp, predicted.size() - tp, gold.size() - tp);
}

}  // namespace dibmine::stats
