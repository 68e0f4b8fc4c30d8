// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// anything fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dibmine/corpus.hpp"
#include "dibmine/disambig.hpp"
#include "dibmine/embeddings.hpp"
#include "dibmine/match_stats.hpp"
#include "dibmine/pipeline.hpp"
#include "dibmine/qty_extract.hpp"
#include "dibmine/units.hpp"
#include "synthetic.hpp"

using namespace dibmine;

namespace {

const std::string kFixtures = DIBMINE_FIXTURE_DIR;

struct Harness {
  int failures = 0;

  void run(const char* name, double budget_seconds,
           const std::function<void(std::string&)>& body) {
    std::string detail;
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      body(detail);
      ok = detail.empty();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (ok && budget_seconds > 0 && elapsed > budget_seconds) {
      ok = false;
      detail = "runtime " + std::to_string(elapsed) + " s over budget " +
               std::to_string(budget_seconds) + " s";
    }
    std::printf("%s  %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", name, elapsed,
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
  }
};

void expect(std::string& detail, bool condition, const std::string& message) {
  if (!condition && detail.empty()) detail = message;
}

std::vector<qty::Quantity> extract_text(const std::string& text) {
  const auto doc = corpus::tokenize(text, "acc");
  return qty::attach_units(qty::scan_numbers(doc), doc,
                           units::UnitRegistry::builtin(),
                           units::AmbiguityTable::builtin());
}

}  // namespace

int main() {
  Harness harness;

  harness.run("1. quantity-format coverage", 1.0, [](std::string& detail) {
    const auto sci = qty::parse_numeric_literal("28.4×10^3");
    expect(detail, sci && sci->value() == 28400.0,
           "28.4×10^3 must parse to exactly 28400");
    const auto thousands = qty::parse_numeric_literal("28,400");
    expect(detail, thousands && thousands->value() == 28400.0,
           "28,400 must parse to exactly 28400");
    const auto pm = qty::parse_numeric_literal("(28.4±0.1)×10^3");
    expect(detail,
           pm && pm->value() == 28400.0 && pm->uncertainty &&
               *pm->uncertainty == 100.0,
           "(28.4±0.1)×10^3 must parse to exactly 28400±100");
    expect(detail, extract_text("MWC 349A is a star").empty(),
           "MWC 349A must yield zero quantities");
  });

  harness.run("2. unit equivalence 1500 Å ↔ 0.15 µm", 0, [](std::string& detail) {
    const auto& reg = units::UnitRegistry::builtin();
    const auto& angstrom = *reg.find_canonical("angstrom");
    const auto& micron = *reg.find_canonical("micron");
    const double forward = units::convert(1500.0, angstrom, micron);
    const double back = units::convert(0.15, micron, angstrom);
    expect(detail, std::abs(forward - 0.15) / 0.15 < 1e-12,
           "1500 angstrom -> micron relative error >= 1e-12");
    expect(detail, std::abs(back - 1500.0) / 1500.0 < 1e-12,
           "0.15 micron -> angstrom relative error >= 1e-12");
  });

  harness.run("3. statistics reproduction (0.78/nm, 79%)", 0,
              [](std::string& detail) {
    const auto catalog =
        corpus::load_dib_catalog(kFixtures + "/catalog_380.csv");
    expect(detail, catalog.size() == 380, "fixture must hold 380 bands");
    const double density = stats::dib_density(catalog);
    expect(detail, std::abs(density - 0.776) <= 0.005,
           "density " + std::to_string(density) + " outside 0.776±0.005");
    const double poisson = stats::poisson_match_prob(density, 1.0);
    expect(detail, std::abs(poisson - 0.790) <= 0.005,
           "poisson prob " + std::to_string(poisson) + " outside 0.790±0.005");
  });

  harness.run("4. joint probability over the davies09 sigmas", 0,
              [](std::string& detail) {
    const std::vector<double> sigmas = {1.0, 2.6, 0.1, 0.3, 0.3, 1.0,
                                        0.5, 0.2, 2.0, 1.0, 2.2};
    double oracle = 1.0;  // hand-derivable product of 1 - exp(-1.56 σ)
    for (double s : sigmas) oracle *= -std::expm1(-2.0 * 0.78 * s);
    const double joint = stats::joint_match_prob(0.78, sigmas);
    expect(detail, joint >= 5e-4 && joint <= 4e-3,
           "joint " + std::to_string(joint) + " outside [5e-4, 4e-3]");
    // Two significant figures against the oracle (≈1.3×10⁻³).
    expect(detail, std::abs(joint - oracle) <= 0.05 * oracle,
           "joint does not match the Poisson-product oracle to 2 sig figs");
    expect(detail, joint >= 1.25e-3 && joint <= 1.35e-3,
           "joint " + std::to_string(joint) + " rounds away from 1.3e-3");
  });

  harness.run("5. evaluation identity (Table-2 counts)", 0,
              [](std::string& detail) {
    const auto report = stats::EvalReport::from_counts(203, 41, 40);
    expect(detail, report.precision == 203.0 / 244.0,
           "precision must be exactly 203/244");
    expect(detail, report.recall == 203.0 / 243.0,
           "recall must be exactly 203/243");
    const std::string summary = report.summary();
    for (const char* token : {"203/244", "203/243", "83.2%", "83.5%"})
      expect(detail, summary.find(token) != std::string::npos,
             std::string("summary must contain ") + token);
  });

  harness.run("6. closest-band matching on the results-table catalog", 0,
              [](std::string& detail) {
    const auto catalog =
        corpus::load_dib_catalog(kFixtures + "/catalog_table3_sel.csv");
    struct Case {
      double query;
      double expected;
      bool within;
    };
    const Case cases[] = {{488.0, 488.00, true},
                          {560.0, 560.09, true},
                          {619.9, 619.90, true},
                          {425.0, 450.18, false}};
    for (const auto& c : cases) {
      const auto r = stats::closest_dib(catalog, c.query, 1.0);
      expect(detail, std::abs(r.closest.lambda_nm - c.expected) < 1e-9,
             "query " + std::to_string(c.query) + " matched " +
                 std::to_string(r.closest.lambda_nm) + ", expected " +
                 std::to_string(c.expected));
      expect(detail, r.within_sigma == c.within,
             "query " + std::to_string(c.query) + " within_sigma mismatch");
    }
  });

  harness.run("7. CBOW gradient versus finite differences", 10.0,
              [](std::string& detail) {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> weight(-0.8, 0.8);
    std::uniform_int_distribution<std::uint32_t> row(0, 11);
    std::uniform_int_distribution<std::size_t> ctx_size(1, 6);
    const std::size_t vocab = 12, dim = 8;
    const double h = 1e-5;
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::vector<double>> input(vocab, std::vector<double>(dim));
      std::vector<std::vector<double>> output(vocab, std::vector<double>(dim));
      for (auto& r : input)
        for (auto& x : r) x = weight(gen);
      for (auto& r : output)
        for (auto& x : r) x = weight(gen);
      std::vector<std::uint32_t> context(ctx_size(gen));
      for (auto& c : context) c = row(gen);
      const std::uint32_t target = row(gen);
      std::vector<std::uint32_t> negatives(5);
      for (auto& n : negatives) n = row(gen);

      const auto step = embed::cbow_loss_and_grad<double>(
          input, output, context, target, negatives);
      auto loss_at = [&](const auto& in, const auto& out) {
        return embed::cbow_loss_and_grad<double>(in, out, context, target,
                                                 negatives)
            .loss;
      };
      auto rel = [&](double analytic, double numeric) {
        const double scale =
            std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        return std::abs(analytic - numeric) / scale;
      };
      std::map<std::uint32_t, std::size_t> multiplicity;
      for (auto c : context) ++multiplicity[c];
      for (const auto& [r, count] : multiplicity)
        for (std::size_t j = 0; j < dim; ++j) {
          auto plus = input, minus = input;
          plus[r][j] += h;
          minus[r][j] -= h;
          const double numeric =
              (loss_at(plus, output) - loss_at(minus, output)) / (2 * h);
          worst = std::max(
              worst, rel(step.context_grad[j] * static_cast<double>(count),
                         numeric));
        }
      for (const auto& [r, grad] : step.output_grads)
        for (std::size_t j = 0; j < dim; ++j) {
          auto plus = output, minus = output;
          plus[r][j] += h;
          minus[r][j] -= h;
          const double numeric =
              (loss_at(input, plus) - loss_at(input, minus)) / (2 * h);
          worst = std::max(worst, rel(grad[j], numeric));
        }
    }
    expect(detail, worst < 1e-4,
           "worst relative gradient error " + std::to_string(worst));
  });

  harness.run("8. distributional property and determinism", 60.0,
              [](std::string& detail) {
    const auto corpus = synthetic::substitution_corpus(5000);
    embed::TrainConfig config;
    config.dimension = 16;
    config.window = 3;
    config.epochs = 10;
    config.min_count = 1;
    config.initial_lr = 0.05f;
    config.seed = 3;
    const auto first = embed::train_cbow(corpus, config);
    const auto second = embed::train_cbow(corpus, config);
    expect(detail, first.model == second.model,
           "two seeded runs must produce identical models");
    const auto aa = first.model.find("aa");
    const auto bb = first.model.find("bb");
    expect(detail, aa && bb, "pair tokens missing from vocabulary");
    if (aa && bb) {
      const double similarity = embed::cosine(first.model.input_vector(*aa),
                                              first.model.input_vector(*bb));
      expect(detail, similarity > 0.9,
             "cosine(aa, bb) = " + std::to_string(similarity) + " <= 0.9");
    }
  });

  harness.run("9. fine-tune displacement trend", 0, [](std::string& detail) {
    synthetic::Corpus generic;
    for (int rep = 0; rep < 60; ++rep)
      for (int i = 0; i < 10; ++i)
        generic.push_back({"f" + std::to_string(rep % 5),
                           "t" + std::to_string(i),
                           "f" + std::to_string(rep % 7)});
    embed::TrainConfig config;
    config.dimension = 12;
    config.window = 2;
    config.epochs = 5;
    config.min_count = 1;
    config.seed = 13;
    auto result = embed::train_cbow(generic, config);

    synthetic::Corpus domain;
    for (int i = 0; i < 10; ++i)
      for (int rep = 0; rep < 12 * i; ++rep)
        domain.push_back({"d" + std::to_string(rep % 4),
                          "t" + std::to_string(i),
                          "d" + std::to_string(rep % 3)});
    const auto report = embed::fine_tune(result.model, domain, config);
    std::vector<double> ratio, displacement;
    for (const auto& token : report.tokens)
      if (token.token.size() == 2 && token.token[0] == 't') {
        ratio.push_back(static_cast<double>(token.domain_count) /
                        static_cast<double>(token.generic_count));
        displacement.push_back(token.displacement);
      }
    expect(detail, ratio.size() == 10, "grid tokens missing");
    const double rho = synthetic::spearman(ratio, displacement);
    expect(detail, rho > 0.5,
           "spearman correlation " + std::to_string(rho) + " <= 0.5");

    auto untouched = embed::train_cbow(generic, config);
    const auto empty_report = embed::fine_tune(untouched.model, {}, config);
    for (const auto& token : empty_report.tokens)
      expect(detail, token.displacement == 0.0,
             "token " + token.token + " moved on an empty corpus");
  });

  harness.run("10. filter cascade on the planted corpus", 0,
              [](std::string& detail) {
    const auto fx = synthetic::pipeline_fixture();
    const auto masked = qty::build_masked_corpus(
        fx.train_docs, units::UnitRegistry::builtin(),
        units::AmbiguityTable::builtin());
    const auto model =
        embed::train_cbow(masked, synthetic::disambig_train_config()).model;
    const auto report = pipeline::run_pipeline(
        fx.eval_docs, model, fx.catalog, units::UnitRegistry::builtin(),
        units::AmbiguityTable::builtin());

    std::set<std::string> survivors;
    for (const auto& c : report.candidates) survivors.insert(c.doc_id);
    const std::set<std::string> expected(fx.clean_ids.begin(),
                                         fx.clean_ids.end());
    expect(detail, survivors == expected,
           "survivor set differs from the planted clean set (" +
               std::to_string(survivors.size()) + " vs " +
               std::to_string(expected.size()) + ")");
    const auto& funnel = report.funnel;
    const std::size_t stages[] = {funnel.extracted,
                                  funnel.resolved,
                                  funnel.after_micron,
                                  funnel.after_cooccurrence,
                                  funnel.after_similarity,
                                  funnel.matched};
    for (std::size_t i = 1; i < std::size(stages); ++i)
      expect(detail, stages[i] <= stages[i - 1],
             "funnel is not monotone non-increasing");
  });

  harness.run("11. nearest-band search equals the brute-force oracle", 0,
              [](std::string& detail) {
    const auto catalog =
        corpus::load_dib_catalog(kFixtures + "/catalog_380.csv");
    std::mt19937 gen(505);
    std::uniform_real_distribution<double> query(300.0, 830.0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      const double lambda = query(gen);
      const auto fast = stats::closest_dib(catalog, lambda, 1.0);
      const corpus::DibCatalogEntry* best = nullptr;
      double best_delta = 0;
      for (const auto& e : catalog.entries) {
        const double delta = std::abs(e.lambda_nm - lambda);
        if (best == nullptr || delta < best_delta) {
          best = &e;
          best_delta = delta;
        }
      }
      if (fast.closest.lambda_nm != best->lambda_nm) ++mismatches;
    }
    expect(detail, mismatches == 0,
           std::to_string(mismatches) + " oracle mismatches");
  });

  if (harness.failures > 0) {
    std::printf("%d criterion(s) failed\n", harness.failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
