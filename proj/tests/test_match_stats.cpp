#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "dibmine/match_stats.hpp"

using namespace dibmine;
using namespace dibmine::stats;

namespace {
const std::string kFixtures = DIBMINE_FIXTURE_DIR;

// Independent oracle: linear scan with the same lower-wavelength tie rule.
corpus::DibCatalogEntry brute_force_closest(const corpus::DibCatalog& catalog,
                                            double lambda) {
  const corpus::DibCatalogEntry* best = &catalog.entries.front();
  double best_delta = std::abs(best->lambda_nm - lambda);
  for (const auto& e : catalog.entries) {
    const double delta = std::abs(e.lambda_nm - lambda);
    if (delta < best_delta) {
      best = &e;
      best_delta = delta;
    }
  }
  return *best;
}
}  // namespace

TEST_CASE("closest_dib matches the consistent entries") {
  const auto catalog = corpus::load_dib_catalog(kFixtures + "/catalog_table3.csv");
  const auto r488 = closest_dib(catalog, 488.0, 1.0);
  CHECK(r488.closest.lambda_nm == Approx(488.00));
  CHECK(r488.delta_nm == Approx(0.0));
  CHECK(r488.within_sigma);

  const auto r560 = closest_dib(catalog, 560.0, 1.0);
  CHECK(r560.closest.lambda_nm == Approx(560.09));
  CHECK(r560.within_sigma);

  const auto r6199 = closest_dib(catalog, 619.9, 1.0);
  CHECK(r6199.closest.lambda_nm == Approx(619.90));
  CHECK(r6199.within_sigma);

  // The grey case: 453 nm sits 2.82 nm from its closest band.
  const auto r453 = closest_dib(catalog, 453.0, 1.0);
  CHECK(r453.closest.lambda_nm == Approx(450.18));
  CHECK_FALSE(r453.within_sigma);

  const auto exact = closest_dib(catalog, 505.48, 1.0);
  CHECK(exact.delta_nm == 0.0);
}

TEST_CASE("closest_dib resolves ties to the lower wavelength") {
  corpus::DibCatalog catalog;
  catalog.entries = {{500.0, 0.01, {}}, {502.0, 0.01, {}}};
  const auto r = closest_dib(catalog, 501.0, 1.0);
  CHECK(r.closest.lambda_nm == 500.0);

  corpus::DibCatalog empty;
  CHECK_THROWS_AS(closest_dib(empty, 500.0, 1.0), Error);
}

TEST_CASE("closest_dib equals the brute-force oracle on random queries") {
  const auto catalog = corpus::load_dib_catalog(kFixtures + "/catalog_380.csv");
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> q(300.0, 830.0);
  for (int i = 0; i < 1000; ++i) {
    const double lambda = q(gen);
    const auto fast = closest_dib(catalog, lambda, 1.0);
    const auto slow = brute_force_closest(catalog, lambda);
    CHECK(fast.closest.lambda_nm == slow.lambda_nm);
  }
}

TEST_CASE("dib density on the 380-band fixture") {
  const auto catalog = corpus::load_dib_catalog(kFixtures + "/catalog_380.csv");
  const double density = dib_density(catalog);
  CHECK(density == Approx(380.0 / 490.0));
  CHECK(density == Approx(0.78).margin(0.005));

  corpus::DibCatalog one;
  one.entries = {{500.0, 0.01, {}}};
  one.declared_range_nm = {{500.0, 501.0}};
  CHECK(dib_density(one) == 1.0);

  corpus::DibCatalog none;
  none.declared_range_nm = {{500.0, 510.0}};
  CHECK(dib_density(none) == 0.0);

  corpus::DibCatalog zero_width;
  zero_width.entries = {{500.0, 0.01, {}}};
  zero_width.declared_range_nm = {{500.0, 500.0}};
  CHECK_THROWS_AS(dib_density(zero_width), Error);

  corpus::DibCatalog undeclared;
  undeclared.entries = {{500.0, 0.01, {}}};
  CHECK_THROWS_AS(dib_density(undeclared), Error);
}

TEST_CASE("poisson window probability") {
  // 1 - exp(-2*0.78) = 0.78986 for the survey's density at sigma 1 nm.
  CHECK(poisson_match_prob(0.78, 1.0) == Approx(0.790).margin(0.005));
  CHECK(poisson_match_prob(0.0, 1.0) == 0.0);
  CHECK(poisson_match_prob(0.78, 1e9) == Approx(1.0));

  // Monotone in both arguments, bounded in [0, 1).
  double prev = -1.0;
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double p = poisson_match_prob(0.78, sigma);
    CHECK(p > prev);
    CHECK(p >= 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
  prev = -1.0;
  for (double density : {0.0, 0.1, 0.5, 1.0, 3.0}) {
    const double p = poisson_match_prob(density, 1.0);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("joint probability over the eleven-band uncertainty list") {
  const std::vector<double> sigmas = {1.0, 2.6, 0.1, 0.3, 0.3, 1.0,
                                      0.5, 0.2, 2.0, 1.0, 2.2};
  // Oracle: hand product of 1 - exp(-1.56*sigma_i), frozen here.
  double expected = 1.0;
  for (double s : sigmas) expected *= 1.0 - std::exp(-2.0 * 0.78 * s);
  CHECK(expected == Approx(1.31e-3).epsilon(0.01));

  const double joint = joint_match_prob(0.78, sigmas);
  CHECK(joint == Approx(expected));
  CHECK(joint > 5e-4);
  CHECK(joint < 4e-3);
}

TEST_CASE("joint probability consistency") {
  CHECK(joint_match_prob(0.78, {1.0}) == poisson_match_prob(0.78, 1.0));
  CHECK(joint_match_prob(0.78, {1.0, 1.0}) ==
        Approx(std::pow(poisson_match_prob(0.78, 1.0), 2)));
  CHECK_THROWS_AS(joint_match_prob(0.78, {}), Error);
  CHECK_THROWS_AS(joint_match_prob(0.78, {1.0, -1.0}), Error);
}

TEST_CASE("match fraction mirrors the 43-centroid result") {
  std::vector<MatchResult> results(43);
  for (std::size_t i = 0; i < 43; ++i) results[i].within_sigma = i >= 8;
  const auto f = match_fraction(results);
  CHECK(f.total == 43);
  CHECK(f.within == 35);
  CHECK(f.fraction_missed == Approx(8.0 / 43.0));
  CHECK(f.fraction_missed == Approx(0.19).margin(0.005));

  std::vector<MatchResult> all(5);
  for (auto& r : all) r.within_sigma = true;
  CHECK(match_fraction(all).fraction_within == 1.0);
  for (auto& r : all) r.within_sigma = false;
  CHECK(match_fraction(all).fraction_within == 0.0);
}

TEST_CASE("precision and recall from raw counts") {
  const auto report = EvalReport::from_counts(203, 41, 40);
  CHECK(report.precision == Approx(203.0 / 244.0));
  CHECK(report.recall == Approx(203.0 / 243.0));
  const std::string summary = report.summary();
  CHECK(summary.find("203/244") != std::string::npos);
  CHECK(summary.find("203/243") != std::string::npos);
  CHECK(summary.find("83.2%") != std::string::npos);
  CHECK(summary.find("83.5%") != std::string::npos);

  const auto perfect = EvalReport::from_counts(10, 0, 0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);

  const auto empty = EvalReport::from_counts(0, 0, 5);
  CHECK_FALSE(empty.precision_defined);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
}

TEST_CASE("span matching is one-to-one greedy by overlap") {
  std::vector<Span> predicted = {
      {"d", 0, 10}, {"d", 12, 20}, {"d", 40, 45}, {"e", 0, 5}};
  std::vector<Span> gold = {{"d", 5, 15}, {"d", 30, 35}, {"e", 3, 8}};
  const auto report = precision_recall(predicted, gold);
  // gold[0] overlaps predicted[0] (5) and predicted[1] (3): consumed once.
  CHECK(report.tp == 2);
  CHECK(report.fp == 2);
  CHECK(report.fn == 1);
  CHECK(report.tp + report.fp == predicted.size());
  CHECK(report.tp + report.fn == gold.size());

  // Doc ids partition the matching.
  std::vector<Span> other_doc = {{"z", 5, 15}};
  CHECK(precision_recall(other_doc, gold).tp == 0);
}
