// dibmine: mine scientific abstracts for physical quantities, resolve
// ambiguous units with word embeddings, filter candidates, and match
// wavelengths against a DIB catalog.
//
// Subcommands: train, finetune, extract, pipeline, match, stats, eval, plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dibmine/corpus.hpp"
#include "dibmine/disambig.hpp"
#include "dibmine/embeddings.hpp"
#include "dibmine/match_stats.hpp"
#include "dibmine/pipeline.hpp"
#include "dibmine/qty_extract.hpp"
#include "dibmine/svg_plot.hpp"
#include "dibmine/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct CommonPaths {
  std::string corpus;
  std::string model;
  std::string catalog;
  std::string gold;
  std::string out;
  std::string units_file;
  std::string ambiguity_file;
};

// Missing input files are usage errors: exit 2, message names the path.
bool require_file(const std::string& path, const char* what) {
  if (path.empty()) {
    std::cerr << "error: missing required --" << what << "\n";
    return false;
  }
  if (!fs::exists(path)) {
    std::cerr << "error: " << what << " file not found: " << path << "\n";
    return false;
  }
  return true;
}

// One subcommand runs per process, so the custom tables load at most once.
const dibmine::units::UnitRegistry& registry(const CommonPaths& paths) {
  static std::optional<dibmine::units::UnitRegistry> custom;
  if (!paths.units_file.empty() && !custom) {
    custom = dibmine::units::UnitRegistry::load(paths.units_file);
  }
  return custom ? *custom : dibmine::units::UnitRegistry::builtin();
}

const dibmine::units::AmbiguityTable& ambiguity(const CommonPaths& paths) {
  static std::optional<dibmine::units::AmbiguityTable> custom;
  if (!paths.ambiguity_file.empty() && !custom) {
    custom = dibmine::units::AmbiguityTable::load(paths.ambiguity_file,
                                                  registry(paths));
  }
  return custom ? *custom : dibmine::units::AmbiguityTable::builtin();
}

std::vector<dibmine::corpus::Document> load_corpus(const std::string& path) {
  auto result = dibmine::corpus::ingest_collection(path);
  for (const auto& diag : result.diagnostics)
    std::cerr << path << ": " << diag.message << "\n";
  return std::move(result.documents);
}

void write_loss_log(const std::string& model_path,
                    const std::vector<double>& losses,
                    const std::vector<double>& validation_losses = {}) {
  const std::string path = model_path + ".losses.csv";
  std::ofstream out(path);
  if (!out) throw dibmine::IoError("cannot write loss log: " + path);
  const bool with_validation = !validation_losses.empty();
  out << (with_validation ? "epoch,loss,val_loss\n" : "epoch,loss\n");
  char buffer[96];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (with_validation && i < validation_losses.size())
      std::snprintf(buffer, sizeof(buffer), "%zu,%.17g,%.17g\n", i + 1,
                    losses[i], validation_losses[i]);
    else
      std::snprintf(buffer, sizeof(buffer), "%zu,%.17g\n", i + 1, losses[i]);
    out << buffer;
  }
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw dibmine::IoError("cannot write output: " + path);
  return file;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  for (auto part : dibmine::text::split(csv, ',')) {
    const auto trimmed = dibmine::text::trim(part);
    if (trimmed.empty()) continue;
    out.push_back(std::stod(std::string(trimmed)));
  }
  return out;
}

int cmd_train(const CommonPaths& paths, dibmine::embed::TrainConfig config) {
  if (!require_file(paths.corpus, "corpus")) return kExitUsage;
  const auto docs = load_corpus(paths.corpus);
  dibmine::qty::ExtractionStats stats;
  const auto masked = dibmine::qty::build_masked_corpus(
      docs, registry(paths), ambiguity(paths), &stats);
  auto result = dibmine::embed::train_cbow(masked, config);
  result.model.save(paths.model);
  write_loss_log(paths.model, result.epoch_losses, result.validation_losses);
  std::cerr << "trained on " << docs.size() << " documents ("
            << stats.quantities << " masked quantities), vocabulary "
            << result.model.vocab().size() << ", model written to "
            << paths.model << "\n";
  return kExitOk;
}

int cmd_finetune(const CommonPaths& paths, dibmine::embed::TrainConfig config,
                 const std::string& displacement_path) {
  if (!require_file(paths.model, "model") ||
      !require_file(paths.corpus, "corpus"))
    return kExitUsage;
  auto model = dibmine::embed::EmbeddingModel::load(paths.model);
  config.dimension = model.dim();
  const auto docs = load_corpus(paths.corpus);
  const auto masked = dibmine::qty::build_masked_corpus(
      docs, registry(paths), ambiguity(paths));
  const auto report = dibmine::embed::fine_tune(model, masked, config);
  model.save(paths.out);
  write_loss_log(paths.out, report.epoch_losses);

  const std::string disp_path = displacement_path.empty()
                                    ? paths.out + ".displacements.csv"
                                    : displacement_path;
  std::ofstream disp(disp_path);
  if (!disp) throw dibmine::IoError("cannot write displacements: " + disp_path);
  disp << "token,generic_count,domain_count,displacement\n";
  // An empty domain corpus leaves nothing to report on.
  if (!docs.empty()) {
    char buffer[64];
    for (const auto& t : report.tokens) {
      std::snprintf(buffer, sizeof(buffer), ",%llu,%llu,%.17g\n",
                    static_cast<unsigned long long>(t.generic_count),
                    static_cast<unsigned long long>(t.domain_count),
                    t.displacement);
      disp << t.token << buffer;
    }
  }
  std::cerr << "fine-tuned on " << docs.size() << " documents; displacement"
            << " table (" << report.tokens.size() << " tokens) written to "
            << disp_path << "\n";
  return kExitOk;
}

// With --model, ambiguous records additionally carry the resolution:
// winner, score, runner-up and a flag for unresolvable cases.
int cmd_extract(const CommonPaths& paths) {
  if (!require_file(paths.corpus, "corpus")) return kExitUsage;
  std::optional<dibmine::embed::EmbeddingModel> model;
  if (!paths.model.empty()) {
    if (!require_file(paths.model, "model")) return kExitUsage;
    model = dibmine::embed::EmbeddingModel::load(paths.model);
  }
  const auto docs = load_corpus(paths.corpus);
  std::ofstream file;
  std::ostream& out = open_output(file, paths.out);
  dibmine::qty::ExtractionStats stats;
  for (const auto& doc : docs) {
    const auto extracted =
        dibmine::qty::extract_document(doc, registry(paths), ambiguity(paths),
                                       &stats);
    for (std::size_t qi = 0; qi < extracted.quantities.size(); ++qi) {
      const auto& q = extracted.quantities[qi];
      json record = dibmine::qty::quantity_to_json(q);
      if (model && !q.resolved()) {
        std::size_t mask_pos = extracted.masked.tokens.size();
        for (const auto& [index, pos] : extracted.masked.mask_positions)
          if (index == qi) mask_pos = pos;
        if (mask_pos < extracted.masked.tokens.size()) {
          const auto res = dibmine::disambig::disambiguate(
              *model, extracted.masked.tokens, mask_pos, q, registry(paths));
          if (res.status == dibmine::disambig::ResolutionStatus::resolved) {
            record["winner"] =
                q.candidates[res.winner_index].unit.canonical_name;
            record["score"] = res.score;
            if (res.runner_up) {
              record["runner_up"] =
                  res.runner_up->candidate.canonical_name;
              record["runner_up_score"] = res.runner_up->score;
            }
            record["flag"] = res.tie ? "tie" : "";
          } else {
            record["flag"] = res.status ==
                                     dibmine::disambig::ResolutionStatus::
                                         no_context
                                 ? "no_context"
                                 : "unresolvable";
          }
        }
      }
      out << record.dump() << "\n";
    }
  }
  std::cerr << "extracted " << stats.quantities << " quantities from "
            << docs.size() << " documents (" << stats.literals
            << " literals, " << stats.unitless << " unitless)\n";
  for (const auto& c : stats.conflicts) std::cerr << c << "\n";
  return kExitOk;
}

int cmd_pipeline(const CommonPaths& paths,
                 const dibmine::pipeline::PipelineConfig& config) {
  if (!require_file(paths.corpus, "corpus") ||
      !require_file(paths.model, "model") ||
      !require_file(paths.catalog, "catalog"))
    return kExitUsage;
  const auto docs = load_corpus(paths.corpus);
  const auto model = dibmine::embed::EmbeddingModel::load(paths.model);
  const auto catalog = dibmine::corpus::load_dib_catalog(paths.catalog);
  const auto report = dibmine::pipeline::run_pipeline(
      docs, model, catalog, registry(paths), ambiguity(paths), config);

  std::ofstream file;
  std::ostream& out = open_output(file, paths.out);
  for (const auto& c : report.candidates)
    out << dibmine::pipeline::candidate_to_json(c).dump() << "\n";
  out << dibmine::pipeline::funnel_to_json(report.funnel).dump() << "\n";

  for (const auto& diag : report.diagnostics) std::cerr << diag << "\n";
  const auto& funnel = report.funnel;
  std::printf("%-6s %-16s %8s %12s\n", "rank", "doc_id", "matched",
              "best_score");
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    std::printf("%-6zu %-16s %8zu %12.4f\n", i + 1, c.doc_id.c_str(),
                c.matched_dibs, c.best_similarity);
  }
  std::printf(
      "funnel: %zu docs -> %zu extracted -> %zu resolved -> %zu micron -> "
      "%zu cooccurrence -> %zu similarity -> %zu matched\n",
      funnel.documents, funnel.extracted, funnel.resolved, funnel.after_micron,
      funnel.after_cooccurrence, funnel.after_similarity, funnel.matched);
  return kExitOk;
}

// Reads extraction records; returns (lambda_nm, sigma_nm) per resolved
// length-dimension quantity.
std::vector<std::pair<double, double>> read_wavelengths(
    const std::string& path, const dibmine::units::UnitRegistry& reg) {
  std::ifstream in(path);
  if (!in) throw dibmine::IoError("cannot open quantities: " + path);
  std::vector<std::pair<double, double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (dibmine::text::trim(line).empty()) continue;
    const json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      std::cerr << path << ": line " << line_no << ": not JSON, skipped\n";
      continue;
    }
    if (record.contains("lambda_nm")) {
      if (record.contains("within_sigma") &&
          !record["within_sigma"].get<bool>())
        continue;
      out.emplace_back(record["lambda_nm"].get<double>(),
                       record.value("sigma_nm", 1.0));
      continue;
    }
    std::string unit_name;
    double value_si = 0, sigma_si = 1e-9;
    if (record.contains("value_si") && record.contains("unit")) {
      unit_name = record["unit"].get<std::string>();
      value_si = record["value_si"].get<double>();
      sigma_si = record.value("sigma_si", 1e-9);
    } else if (record.contains("winner") && record.contains("candidates")) {
      // Disambiguated record: take the winning candidate's interpretation.
      unit_name = record["winner"].get<std::string>();
      for (const auto& c : record["candidates"]) {
        if (c.value("unit", std::string{}) != unit_name) continue;
        value_si = c["value_si"].get<double>();
        sigma_si = c.value("sigma_si", 1e-9);
      }
    } else {
      continue;
    }
    const auto* unit = reg.find_canonical(unit_name);
    if (unit == nullptr ||
        unit->dimension() != dibmine::units::DimensionVector::length())
      continue;
    out.emplace_back(value_si * 1e9, sigma_si * 1e9);
  }
  return out;
}

int cmd_match(const CommonPaths& paths, const std::string& quantities_path) {
  if (!require_file(quantities_path, "quantities") ||
      !require_file(paths.catalog, "catalog"))
    return kExitUsage;
  const auto catalog = dibmine::corpus::load_dib_catalog(paths.catalog);
  const auto queries = read_wavelengths(quantities_path, registry(paths));
  std::ofstream file;
  std::ostream& out = open_output(file, paths.out);
  std::vector<dibmine::stats::MatchResult> results;
  for (const auto& [lambda, sigma] : queries) {
    const auto r = dibmine::stats::closest_dib(catalog, lambda, sigma);
    results.push_back(r);
    out << json{{"lambda_nm", r.query_lambda_nm},
                {"sigma_nm", r.query_sigma_nm},
                {"closest_nm", r.closest.lambda_nm},
                {"closest_sigma_nm", r.closest.sigma_nm},
                {"delta_nm", r.delta_nm},
                {"within_sigma", r.within_sigma}}
               .dump()
        << "\n";
  }
  const auto fraction = dibmine::stats::match_fraction(results);
  std::cerr << fraction.within << "/" << fraction.total
            << " quantities within 1 sigma of a catalog band\n";
  return kExitOk;
}

int cmd_stats(const CommonPaths& paths, double sigma,
              const std::string& sigmas_csv,
              const std::string& quantities_path) {
  if (!require_file(paths.catalog, "catalog")) return kExitUsage;
  const auto catalog = dibmine::corpus::load_dib_catalog(paths.catalog);
  const double density = dibmine::stats::dib_density(catalog);
  const double poisson = dibmine::stats::poisson_match_prob(density, sigma);

  json output;
  output["bands"] = catalog.size();
  output["density_per_nm"] = density;
  output["sigma_nm"] = sigma;
  output["poisson_match_prob"] = poisson;
  std::printf("catalog bands: %zu\n", catalog.size());
  std::printf("density: %.2f DIB per nm (%.4f)\n", density, density);
  std::printf("P(at least one DIB within +-%.3g nm) = %.4f (%.0f%%)\n", sigma,
              poisson, poisson * 100.0);

  std::vector<double> sigmas;
  if (!sigmas_csv.empty()) sigmas = parse_double_list(sigmas_csv);
  if (!quantities_path.empty()) {
    if (!require_file(quantities_path, "quantities")) return kExitUsage;
    std::vector<dibmine::stats::MatchResult> results;
    for (const auto& [lambda, s] :
         read_wavelengths(quantities_path, registry(paths))) {
      sigmas.push_back(s);
      results.push_back(dibmine::stats::closest_dib(catalog, lambda, s));
    }
    const auto fraction = dibmine::stats::match_fraction(results);
    output["match_fraction_within"] = fraction.fraction_within;
    output["match_fraction_missed"] = fraction.fraction_missed;
    std::printf("matched within sigma: %zu/%zu (%.1f%%), missed %.1f%%\n",
                fraction.within, fraction.total,
                fraction.fraction_within * 100.0,
                fraction.fraction_missed * 100.0);
  }
  if (!sigmas.empty()) {
    const double joint = dibmine::stats::joint_match_prob(density, sigmas);
    output["joint"] = {{"model", dibmine::stats::joint_match_model()},
                       {"sigmas_nm", sigmas},
                       {"probability", joint}};
    std::printf("joint probability over %zu bands (%s model) = %.3g\n",
                sigmas.size(), dibmine::stats::joint_match_model(), joint);
  }
  if (!paths.out.empty()) {
    std::ofstream file(paths.out);
    if (!file) throw dibmine::IoError("cannot write output: " + paths.out);
    file << output.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_eval(const CommonPaths& paths, const std::string& counts_csv,
             const std::string& predictions_path) {
  dibmine::stats::EvalReport report;
  if (!counts_csv.empty()) {
    const auto counts = parse_double_list(counts_csv);
    if (counts.size() != 3) {
      std::cerr << "error: --counts expects TP,FP,FN\n";
      return kExitUsage;
    }
    report = dibmine::stats::EvalReport::from_counts(
        static_cast<std::uint64_t>(counts[0]),
        static_cast<std::uint64_t>(counts[1]),
        static_cast<std::uint64_t>(counts[2]));
  } else {
    if (!require_file(paths.gold, "gold") ||
        !require_file(predictions_path, "pred"))
      return kExitUsage;
    const auto gold_rows = dibmine::corpus::load_gold_annotations(paths.gold);
    std::vector<dibmine::stats::Span> gold, predicted;
    for (const auto& g : gold_rows)
      gold.push_back({g.doc_id, g.char_start, g.char_end});
    std::ifstream in(predictions_path);
    if (!in)
      throw dibmine::IoError("cannot open predictions: " + predictions_path);
    std::string line;
    while (std::getline(in, line)) {
      if (dibmine::text::trim(line).empty()) continue;
      const json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("span")) continue;
      predicted.push_back({record["doc_id"].get<std::string>(),
                           record["span"][0].get<std::size_t>(),
                           record["span"][1].get<std::size_t>()});
    }
    report = dibmine::stats::precision_recall(predicted, gold);
  }
  std::printf("%s\n", report.summary().c_str());
  return kExitOk;
}

int cmd_plot(const CommonPaths& paths, const std::string& quantities_path,
             double default_band_width) {
  if (!require_file(paths.catalog, "catalog")) return kExitUsage;
  const auto catalog = dibmine::corpus::load_dib_catalog(paths.catalog);
  std::vector<double> lambdas;
  if (!quantities_path.empty()) {
    if (!require_file(quantities_path, "quantities")) return kExitUsage;
    for (const auto& [lambda, sigma] :
         read_wavelengths(quantities_path, registry(paths)))
      lambdas.push_back(lambda);
  }
  const std::string svg_path = paths.out.empty() ? "spectrum.svg" : paths.out;
  const std::string csv_path =
      fs::path(svg_path).replace_extension(".csv").string();
  std::ofstream svg(svg_path);
  if (!svg) throw dibmine::IoError("cannot write plot: " + svg_path);
  std::ofstream csv(csv_path);
  if (!csv) throw dibmine::IoError("cannot write plot csv: " + csv_path);
  dibmine::plot::PlotOptions options;
  options.default_band_width_nm = default_band_width;
  const auto result =
      dibmine::plot::render_spectrum(catalog, lambdas, svg, csv, options);
  if (result.missing_fwhm)
    std::cerr << "warning: catalog rows without fwhm drawn at the default "
              << default_band_width << " nm width\n";
  std::cerr << "wrote " << result.bands << " bands and " << result.markers
            << " markers to " << svg_path << " / " << csv_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"literature mining for DIB wavelength matches"};
  app.set_config("--config", "", "key-value config file; flags win");
  app.fallthrough();
  app.require_subcommand(1);

  CommonPaths paths;
  dibmine::embed::TrainConfig train_config;
  dibmine::pipeline::PipelineConfig pipe_config;
  std::string displacement_path, quantities_path, sigmas_csv, counts_csv,
      predictions_path, context_mode = "window5";
  double sigma = 1.0;
  double default_band_width = 0.1;
  bool deterministic = true;
  std::uint32_t threads = 1;

  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dim", train_config.dimension, "embedding dimension");
    cmd->add_option("--window", train_config.window, "context window");
    cmd->add_option("--epochs", train_config.epochs, "training epochs");
    cmd->add_option("--min-count", train_config.min_count,
                    "minimum token count");
    cmd->add_option("--negatives", train_config.negatives,
                    "negative samples per example");
    cmd->add_option("--lr", train_config.initial_lr, "initial learning rate");
    cmd->add_option("--subsample", train_config.subsample,
                    "frequent-word subsampling threshold (0 = off)");
    cmd->add_option("--val-fraction", train_config.validation_fraction,
                    "hold-out fraction for a per-epoch validation loss");
    cmd->add_option("--seed", train_config.seed, "RNG seed");
    cmd->add_option("--threads", threads, "worker threads (>1 not"
                    " deterministic)");
    cmd->add_flag("--deterministic,!--no-deterministic", deterministic,
                  "force single-threaded reproducible training");
  };
  auto add_unit_flags = [&](CLI::App* cmd) {
    cmd->add_option("--units", paths.units_file, "unit registry config file");
    cmd->add_option("--ambiguity", paths.ambiguity_file,
                    "ambiguity table config file");
  };

  CLI::App* train = app.add_subcommand("train", "train a CBOW model");
  train->add_option("--corpus", paths.corpus, "JSONL corpus");
  train->add_option("--model", paths.model, "output model path")->required();
  add_train_flags(train);
  add_unit_flags(train);

  CLI::App* finetune =
      app.add_subcommand("finetune", "fine-tune a model on a domain corpus");
  finetune->add_option("--model", paths.model, "input model");
  finetune->add_option("--corpus", paths.corpus, "domain JSONL corpus");
  finetune->add_option("--out", paths.out, "output model path")->required();
  finetune->add_option("--displacements", displacement_path,
                       "displacement CSV path");
  add_train_flags(finetune);
  add_unit_flags(finetune);

  CLI::App* extract =
      app.add_subcommand("extract", "extract quantities to JSONL");
  extract->add_option("--corpus", paths.corpus, "JSONL corpus");
  extract->add_option("--model", paths.model,
                      "embedding model for unit disambiguation");
  extract->add_option("--out", paths.out, "output JSONL ('-' = stdout)");
  add_unit_flags(extract);

  CLI::App* pipeline_cmd =
      app.add_subcommand("pipeline", "run the filter cascade");
  pipeline_cmd->add_option("--corpus", paths.corpus, "JSONL corpus");
  pipeline_cmd->add_option("--model", paths.model, "embedding model");
  pipeline_cmd->add_option("--catalog", paths.catalog, "DIB catalog CSV");
  pipeline_cmd->add_option("--out", paths.out, "candidate JSONL output");
  pipeline_cmd->add_option("--sim-threshold",
                           pipe_config.similarity_threshold,
                           "similarity filter threshold");
  pipeline_cmd->add_option("--window", pipe_config.window, "context window");
  pipeline_cmd
      ->add_option("--stoplist", [&pipe_config](const auto& values) {
        pipe_config.stoplist.clear();
        for (auto part : dibmine::text::split(values.at(0), ','))
          if (!part.empty())
            pipe_config.stoplist.emplace_back(dibmine::text::trim(part));
        return true;
      },
      "comma-separated co-occurrence stop list")
      ->expected(1);
  pipeline_cmd->add_option("--context", context_mode,
                           "similarity context: window5 or sentence")
      ->check(CLI::IsMember({"window5", "sentence"}));
  add_unit_flags(pipeline_cmd);

  CLI::App* match = app.add_subcommand("match", "match wavelengths");
  match->add_option("--quantities", quantities_path,
                    "extraction/match JSONL");
  match->add_option("--catalog", paths.catalog, "DIB catalog CSV");
  match->add_option("--out", paths.out, "match JSONL output");
  add_unit_flags(match);

  CLI::App* stats_cmd =
      app.add_subcommand("stats", "catalog match statistics");
  stats_cmd->add_option("--catalog", paths.catalog, "DIB catalog CSV");
  stats_cmd->add_option("--sigma", sigma, "query sigma in nm");
  stats_cmd->add_option("--sigmas", sigmas_csv,
                        "comma list of per-band sigmas for the joint"
                        " probability");
  stats_cmd->add_option("--quantities", quantities_path,
                        "extraction JSONL whose sigmas drive the joint"
                        " probability");
  stats_cmd->add_option("--out", paths.out, "JSON report path");
  add_unit_flags(stats_cmd);

  CLI::App* eval = app.add_subcommand("eval", "precision/recall report");
  eval->add_option("--counts", counts_csv, "direct TP,FP,FN counts");
  eval->add_option("--gold", paths.gold, "gold annotation CSV");
  eval->add_option("--pred", predictions_path, "extraction JSONL");

  CLI::App* plot = app.add_subcommand("plot", "render the spectrum SVG");
  plot->add_option("--catalog", paths.catalog, "DIB catalog CSV");
  plot->add_option("--quantities", quantities_path, "match JSONL");
  plot->add_option("--out", paths.out, "SVG output path");
  plot->add_option("--band-width", default_band_width,
                   "band width in nm when fwhm is missing");
  add_unit_flags(plot);

  CLI11_PARSE(app, argc, argv);

  if (!deterministic) train_config.threads = threads;
  if (threads > 1 && deterministic) {
    std::cerr << "note: --threads > 1 requires --no-deterministic; running"
              << " single-threaded\n";
  }
  if (context_mode == "sentence")
    pipe_config.context = dibmine::pipeline::ContextMode::sentence;

  try {
    if (train->parsed()) return cmd_train(paths, train_config);
    if (finetune->parsed())
      return cmd_finetune(paths, train_config, displacement_path);
    if (extract->parsed()) return cmd_extract(paths);
    if (pipeline_cmd->parsed()) return cmd_pipeline(paths, pipe_config);
    if (match->parsed()) return cmd_match(paths, quantities_path);
    if (stats_cmd->parsed())
      return cmd_stats(paths, sigma, sigmas_csv, quantities_path);
    if (eval->parsed())
      return cmd_eval(paths, counts_csv, predictions_path);
    if (plot->parsed())
      return cmd_plot(paths, quantities_path, default_band_width);
  } catch (const dibmine::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
