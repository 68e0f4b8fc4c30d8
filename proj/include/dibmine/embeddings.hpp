#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "dibmine/error.hpp"

// CBOW word embeddings with negative sampling: vocabulary construction over
// a generic and a domain corpus, single-threaded deterministic training,
// optional unsynchronized parallel training, fine-tuning with displacement
// reporting, and a little-endian binary model format.

namespace dibmine::embed {

namespace embdetail {

struct TransparentHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
  std::size_t operator()(const std::string& s) const {
    return std::hash<std::string_view>{}(s);
  }
};

struct TransparentEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return a == b;
  }
};

// Deterministic, platform-independent RNG (splitmix64).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

 private:
  std::uint64_t state_;
};

}  // namespace embdetail

struct VocabEntry {
  std::string token;
  std::uint64_t generic_count = 0;
  std::uint64_t domain_count = 0;
};

// Token → dense index map with per-corpus frequencies. Entries are ordered
// by (count desc, token asc) so construction is deterministic.
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::uint32_t min_count) {
    if (corpus.empty()) throw VocabError("build_vocab: empty corpus");
    std::map<std::string, std::uint64_t> counts;
    std::size_t total = 0;
    for (const auto& stream : corpus)
      for (const auto& token : stream) {
        ++counts[token];
        ++total;
      }
    if (total == 0) throw VocabError("build_vocab: empty corpus");
    std::vector<VocabEntry> entries;
    for (auto& [token, count] : counts)
      if (count >= min_count) entries.push_back({token, count, 0});
    if (entries.empty())
      throw VocabError("build_vocab: no token reaches min_count " +
                       std::to_string(min_count));
    std::sort(entries.begin(), entries.end(),
              [](const VocabEntry& a, const VocabEntry& b) {
                if (a.generic_count != b.generic_count)
                  return a.generic_count > b.generic_count;
                return a.token < b.token;
              });
    Vocabulary vocab;
    vocab.min_count_ = min_count;
    for (auto& e : entries) vocab.append(std::move(e));
    return vocab;
  }

  std::optional<std::uint32_t> find(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const VocabEntry& entry(std::uint32_t index) const {
    return entries_[index];
  }
  VocabEntry& entry(std::uint32_t index) { return entries_[index]; }
  std::uint32_t size() const {
    return static_cast<std::uint32_t>(entries_.size());
  }
  std::uint32_t min_count() const { return min_count_; }

  // Records domain-corpus counts; unseen tokens with enough occurrences are
  // appended (deterministically ordered) and their indices returned.
  std::vector<std::uint32_t> add_domain_corpus(
      const std::vector<std::vector<std::string>>& corpus,
      std::uint32_t min_count) {
    std::map<std::string, std::uint64_t> new_counts;
    for (const auto& stream : corpus)
      for (const auto& token : stream) {
        if (auto idx = find(token)) {
          ++entries_[*idx].domain_count;
        } else {
          ++new_counts[token];
        }
      }
    std::vector<VocabEntry> added;
    for (auto& [token, count] : new_counts)
      if (count >= min_count) added.push_back({token, 0, count});
    std::sort(added.begin(), added.end(),
              [](const VocabEntry& a, const VocabEntry& b) {
                if (a.domain_count != b.domain_count)
                  return a.domain_count > b.domain_count;
                return a.token < b.token;
              });
    std::vector<std::uint32_t> indices;
    for (auto& e : added) {
      indices.push_back(size());
      append(std::move(e));
    }
    return indices;
  }

  void append(VocabEntry entry) {
    index_.emplace(entry.token, static_cast<std::uint32_t>(entries_.size()));
    entries_.push_back(std::move(entry));
  }

  const std::vector<VocabEntry>& entries() const { return entries_; }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, std::uint32_t, embdetail::TransparentHash,
                     embdetail::TransparentEq>
      index_;
  std::uint32_t min_count_ = 1;
};

struct TrainConfig {
  std::uint32_t dimension = 100;
  std::uint32_t window = 5;
  std::uint32_t epochs = 10;
  std::uint32_t negatives = 5;
  std::uint32_t min_count = 5;
  float initial_lr = 0.025f;
  float final_lr = 0.0001f;
  double subsample = 0.0;  // frequent-word subsampling threshold; 0 = off
  // Fraction of documents held out for a per-epoch validation loss; 0
  // disables the split. Hold-out is deterministic (every k-th document).
  double validation_fraction = 0.0;
  std::uint64_t seed = 1;
  std::uint32_t threads = 1;  // >1 trades determinism for speed

  void validate() const {
    if (dimension < 1 || window < 1 || epochs < 1)
      throw Error("train config: dimension, window and epochs must be >= 1");
    if (!(initial_lr > 0))
      throw Error("train config: initial learning rate must be positive");
    if (validation_fraction < 0 || validation_fraction >= 1)
      throw Error("train config: validation fraction must be in [0, 1)");
  }
};

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(Vocabulary vocab, const TrainConfig& config)
      : vocab_(std::move(vocab)), config_(config) {
    config_.validate();
    embdetail::Rng rng(config_.seed);
    input_.resize(static_cast<std::size_t>(vocab_.size()) * dim());
    output_.assign(static_cast<std::size_t>(vocab_.size()) * dim(), 0.0f);
    init_rows(0, vocab_.size(), rng);
  }

  std::uint32_t dim() const { return config_.dimension; }
  const Vocabulary& vocab() const { return vocab_; }
  Vocabulary& vocab() { return vocab_; }
  const TrainConfig& config() const { return config_; }

  std::span<const float> input_vector(std::uint32_t index) const {
    return {input_.data() + static_cast<std::size_t>(index) * dim(), dim()};
  }
  std::span<float> input_vector(std::uint32_t index) {
    return {input_.data() + static_cast<std::size_t>(index) * dim(), dim()};
  }
  std::span<const float> output_vector(std::uint32_t index) const {
    return {output_.data() + static_cast<std::size_t>(index) * dim(), dim()};
  }
  std::span<float> output_vector(std::uint32_t index) {
    return {output_.data() + static_cast<std::size_t>(index) * dim(), dim()};
  }

  std::optional<std::uint32_t> find(std::string_view token) const {
    return vocab_.find(token);
  }

  const std::vector<float>& input_matrix() const { return input_; }
  const std::vector<float>& output_matrix() const { return output_; }

  // Fresh rows for tokens added during fine-tuning: input uniform in
  // [-0.5/D, 0.5/D], output zero.
  void grow(std::uint32_t new_vocab_size, embdetail::Rng& rng) {
    const std::uint32_t old_size =
        static_cast<std::uint32_t>(input_.size() / dim());
    input_.resize(static_cast<std::size_t>(new_vocab_size) * dim());
    output_.resize(static_cast<std::size_t>(new_vocab_size) * dim(), 0.0f);
    init_rows(old_size, new_vocab_size, rng);
  }

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
    if (a.dim() != b.dim() || a.vocab_.size() != b.vocab_.size()) return false;
    for (std::uint32_t i = 0; i < a.vocab_.size(); ++i) {
      const auto& ea = a.vocab_.entry(i);
      const auto& eb = b.vocab_.entry(i);
      if (ea.token != eb.token || ea.generic_count != eb.generic_count ||
          ea.domain_count != eb.domain_count)
        return false;
    }
    return std::memcmp(a.input_.data(), b.input_.data(),
                       a.input_.size() * sizeof(float)) == 0 &&
           std::memcmp(a.output_.data(), b.output_.data(),
                       a.output_.size() * sizeof(float)) == 0;
  }

  void save(std::ostream& out) const;
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model: " + path);
    save(out);
  }
  static EmbeddingModel load(std::istream& in);
  static EmbeddingModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path);
    return load(in);
  }

 private:
  void init_rows(std::uint32_t from, std::uint32_t to, embdetail::Rng& rng) {
    const double scale = 1.0 / dim();
    for (std::size_t i = static_cast<std::size_t>(from) * dim();
         i < static_cast<std::size_t>(to) * dim(); ++i)
      input_[i] = static_cast<float>((rng.next_double() - 0.5) * scale);
  }

  Vocabulary vocab_;
  TrainConfig config_;
  std::vector<float> input_;   // V×D row-major
  std::vector<float> output_;  // V×D row-major
};

inline double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) throw Error("cosine: zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Negative-sampling loss and its exact gradients, templated so tests can
// instantiate it in double precision for finite-difference checks.

template <typename Scalar>
struct CbowStep {
  double loss = 0.0;
  std::vector<Scalar> context_grad;  // d(loss)/d(input row), per occurrence
  // d(loss)/d(output row), accumulated per distinct row.
  std::map<std::uint32_t, std::vector<Scalar>> output_grads;
};

// Loss of one (context, target, negatives) example:
//   h = mean of context input rows
//   L = −log σ(h·out[target]) − Σ_n log σ(−h·out[n])
// The gradient w.r.t. each context occurrence is (∂L/∂h)/|context|;
// repeated rows accumulate.
template <typename Scalar>
CbowStep<Scalar> cbow_loss_and_grad(
    const std::vector<std::vector<Scalar>>& input_rows,
    const std::vector<std::vector<Scalar>>& output_rows,
    const std::vector<std::uint32_t>& context,
    std::uint32_t target, const std::vector<std::uint32_t>& negatives) {
  if (context.empty()) throw Error("cbow step: empty context");
  const std::size_t dim = input_rows.front().size();
  CbowStep<Scalar> step;
  std::vector<Scalar> h(dim, Scalar(0));
  for (const auto c : context)
    for (std::size_t j = 0; j < dim; ++j) h[j] += input_rows[c][j];
  const Scalar inv = Scalar(1) / static_cast<Scalar>(context.size());
  for (auto& x : h) x *= inv;

  std::vector<Scalar> grad_h(dim, Scalar(0));
  auto accumulate = [&](std::uint32_t row, bool positive) {
    const auto& out = output_rows[row];
    double f = 0;
    for (std::size_t j = 0; j < dim; ++j)
      f += static_cast<double>(h[j]) * static_cast<double>(out[j]);
    // Stable −log σ(±f).
    const double z = positive ? -f : f;
    step.loss += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    const double sig = 1.0 / (1.0 + std::exp(-f));
    const double g = sig - (positive ? 1.0 : 0.0);  // dL/df
    auto& og = step.output_grads[row];
    if (og.empty()) og.assign(dim, Scalar(0));
    for (std::size_t j = 0; j < dim; ++j) {
      og[j] += static_cast<Scalar>(g) * h[j];
      grad_h[j] += static_cast<Scalar>(g) * out[j];
    }
  };
  accumulate(target, true);
  for (const auto n : negatives) accumulate(n, false);

  step.context_grad.assign(dim, Scalar(0));
  for (std::size_t j = 0; j < dim; ++j) step.context_grad[j] = grad_h[j] * inv;
  return step;
}

// ---------------------------------------------------------------------------
// Trainer.

namespace embdetail {

// unigram^{3/4} negative-sampling table.
class NegativeTable {
 public:
  NegativeTable(const Vocabulary& vocab, std::size_t table_size = 1 << 20) {
    table_.reserve(table_size);
    double total = 0;
    for (const auto& e : vocab.entries())
      total += std::pow(
          static_cast<double>(e.generic_count + e.domain_count), 0.75);
    if (total <= 0) {
      table_.assign(table_size, 0);
      return;
    }
    std::uint32_t index = 0;
    double cumulative =
        std::pow(static_cast<double>(vocab.entry(0).generic_count +
                                     vocab.entry(0).domain_count),
                 0.75) /
        total;
    for (std::size_t i = 0; i < table_size; ++i) {
      table_.push_back(index);
      if (static_cast<double>(i + 1) / table_size > cumulative &&
          index + 1 < vocab.size()) {
        ++index;
        cumulative += std::pow(static_cast<double>(
                                   vocab.entry(index).generic_count +
                                   vocab.entry(index).domain_count),
                               0.75) /
                      total;
      }
    }
  }

  std::uint32_t sample(Rng& rng) const {
    return table_[rng.next_below(table_.size())];
  }

 private:
  std::vector<std::uint32_t> table_;
};

// Maps token streams to vocabulary ids; out-of-vocabulary tokens drop out
// of the stream (they cannot be trained).
inline std::vector<std::vector<std::uint32_t>> to_ids(
    const std::vector<std::vector<std::string>>& corpus,
    const Vocabulary& vocab) {
  std::vector<std::vector<std::uint32_t>> ids;
  ids.reserve(corpus.size());
  for (const auto& stream : corpus) {
    std::vector<std::uint32_t> out;
    out.reserve(stream.size());
    for (const auto& token : stream)
      if (auto idx = vocab.find(token)) out.push_back(*idx);
    ids.push_back(std::move(out));
  }
  return ids;
}

inline double row_displacement(std::span<const float> before,
                               std::span<const float> after) {
  // Untouched rows must report exactly zero, so compare bits first.
  if (std::memcmp(before.data(), after.data(),
                  before.size() * sizeof(float)) == 0)
    return 0.0;
  return 1.0 - cosine(before, after);
}

class CbowTrainer {
 public:
  CbowTrainer(EmbeddingModel& model, const TrainConfig& config)
      : model_(model),
        config_(config),
        table_(model.vocab()),
        total_tokens_(0) {}

  // Runs all epochs over the id streams; returns per-epoch total loss.
  std::vector<double> run(const std::vector<std::vector<std::uint32_t>>& docs) {
    return run_tracked(docs, nullptr, nullptr);
  }

  // Held-out documents scored (never trained) after each epoch.
  void set_validation(std::vector<std::vector<std::uint32_t>> docs) {
    validation_docs_ = std::move(docs);
  }
  const std::vector<double>& validation_losses() const {
    return validation_losses_;
  }

  // Like run(), but also records the mean per-epoch displacement of the
  // rows flagged in `tracked` (used by fine-tuning to observe when vectors
  // stabilize).
  std::vector<double> run_tracked(
      const std::vector<std::vector<std::uint32_t>>& docs,
      std::vector<double>* epoch_mean_displacement,
      const std::vector<bool>* tracked) {
    for (const auto& d : docs) total_tokens_ += d.size();
    const std::uint64_t schedule_total =
        std::max<std::uint64_t>(1, total_tokens_ * config_.epochs);
    std::vector<double> epoch_losses;
    std::uint64_t processed = 0;
    std::vector<float> snapshot;
    for (std::uint32_t epoch = 0; epoch < config_.epochs; ++epoch) {
      if (epoch_mean_displacement != nullptr)
        snapshot = model_.input_matrix();
      double loss = 0;
      if (config_.threads <= 1) {
        Rng rng(config_.seed + epoch * 0x9E37ull);
        for (std::size_t d = 0; d < docs.size(); ++d)
          loss += train_doc(docs[d], rng, processed, schedule_total);
      } else {
        loss = run_parallel_epoch(docs, epoch, processed, schedule_total);
      }
      if (!std::isfinite(loss))
        throw TrainingError(
            "training loss diverged (non-finite); lower the learning rate");
      epoch_losses.push_back(loss);
      if (epoch_mean_displacement != nullptr)
        epoch_mean_displacement->push_back(
            mean_displacement(snapshot, tracked));
      if (!validation_docs_.empty())
        validation_losses_.push_back(evaluate_validation(epoch));
    }
    return epoch_losses;
  }

 private:
  double train_doc(const std::vector<std::uint32_t>& doc, Rng& rng,
                   std::uint64_t& processed, std::uint64_t schedule_total) {
    double loss = 0;
    const std::uint32_t dim = model_.dim();
    std::vector<float> h(dim), grad_h(dim);
    for (std::size_t pos = 0; pos < doc.size(); ++pos) {
      const float lr = learning_rate(processed, schedule_total);
      ++processed;
      const std::uint32_t target = doc[pos];
      if (config_.subsample > 0 && !keep_token(target, rng)) continue;
      // Fixed full window, truncated at document bounds.
      const std::size_t lo =
          pos >= config_.window ? pos - config_.window : 0;
      const std::size_t hi =
          std::min(doc.size(), pos + config_.window + 1);
      std::size_t context_size = 0;
      std::fill(h.begin(), h.end(), 0.0f);
      for (std::size_t k = lo; k < hi; ++k) {
        if (k == pos) continue;
        const auto row = model_.input_vector(doc[k]);
        for (std::uint32_t j = 0; j < dim; ++j) h[j] += row[j];
        ++context_size;
      }
      if (context_size == 0) continue;
      const float inv = 1.0f / static_cast<float>(context_size);
      for (auto& x : h) x *= inv;

      std::fill(grad_h.begin(), grad_h.end(), 0.0f);
      for (std::uint32_t k = 0; k <= config_.negatives; ++k) {
        std::uint32_t row;
        bool positive;
        if (k == 0) {
          row = target;
          positive = true;
        } else {
          row = table_.sample(rng);
          if (row == target) continue;
          positive = false;
        }
        auto out = model_.output_vector(row);
        double f = 0;
        for (std::uint32_t j = 0; j < dim; ++j)
          f += static_cast<double>(h[j]) * out[j];
        const double z = positive ? -f : f;
        loss +=
            z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        const double sig = 1.0 / (1.0 + std::exp(-f));
        const float g = static_cast<float>((positive ? 1.0 : 0.0) - sig);
        for (std::uint32_t j = 0; j < dim; ++j) {
          grad_h[j] += g * out[j];
          out[j] += lr * g * h[j];
        }
      }
      // True gradient of the mean: each context row moves by grad_h/|C|.
      const float step = lr * inv;
      for (std::size_t k = lo; k < hi; ++k) {
        if (k == pos) continue;
        auto row = model_.input_vector(doc[k]);
        for (std::uint32_t j = 0; j < dim; ++j) row[j] += step * grad_h[j];
      }
    }
    return loss;
  }

  double run_parallel_epoch(const std::vector<std::vector<std::uint32_t>>& docs,
                            std::uint32_t epoch, std::uint64_t& processed,
                            std::uint64_t schedule_total) {
    // Hogwild-style: workers share the matrices without coordination, so
    // results are nondeterministic. Documented contract.
    const std::uint32_t n = std::min<std::uint32_t>(
        config_.threads, static_cast<std::uint32_t>(docs.size()) + 1);
    std::vector<double> losses(n, 0.0);
    std::vector<std::thread> workers;
    std::atomic<std::uint64_t> shared_processed{processed};
    for (std::uint32_t w = 0; w < n; ++w) {
      workers.emplace_back([&, w] {
        Rng rng(config_.seed + epoch * 0x9E37ull + w * 0x79B9ull);
        for (std::size_t d = w; d < docs.size(); d += n) {
          std::uint64_t local = shared_processed.load();
          losses[w] += train_doc(docs[d], rng, local, schedule_total);
          shared_processed.fetch_add(docs[d].size());
        }
      });
    }
    for (auto& t : workers) t.join();
    processed = shared_processed.load();
    double total = 0;
    for (double l : losses) total += l;
    return total;
  }

  // Loss over the held-out documents, no parameter updates. Negatives are
  // freshly sampled from an epoch-keyed stream so the number stays
  // deterministic and comparable across runs.
  double evaluate_validation(std::uint32_t epoch) {
    Rng rng(config_.seed ^ 0x0A11DA7Aull ^ (epoch * 0x9E37ull));
    const std::uint32_t dim = model_.dim();
    std::vector<float> h(dim);
    double loss = 0;
    for (const auto& doc : validation_docs_) {
      for (std::size_t pos = 0; pos < doc.size(); ++pos) {
        const std::uint32_t target = doc[pos];
        const std::size_t lo =
            pos >= config_.window ? pos - config_.window : 0;
        const std::size_t hi =
            std::min(doc.size(), pos + config_.window + 1);
        std::size_t context_size = 0;
        std::fill(h.begin(), h.end(), 0.0f);
        for (std::size_t k = lo; k < hi; ++k) {
          if (k == pos) continue;
          const auto row = model_.input_vector(doc[k]);
          for (std::uint32_t j = 0; j < dim; ++j) h[j] += row[j];
          ++context_size;
        }
        if (context_size == 0) continue;
        const float inv = 1.0f / static_cast<float>(context_size);
        for (auto& x : h) x *= inv;
        for (std::uint32_t k = 0; k <= config_.negatives; ++k) {
          std::uint32_t row;
          bool positive;
          if (k == 0) {
            row = target;
            positive = true;
          } else {
            row = table_.sample(rng);
            if (row == target) continue;
            positive = false;
          }
          const auto out = model_.output_vector(row);
          double f = 0;
          for (std::uint32_t j = 0; j < dim; ++j)
            f += static_cast<double>(h[j]) * out[j];
          const double z = positive ? -f : f;
          loss +=
              z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        }
      }
    }
    return loss;
  }

  double mean_displacement(const std::vector<float>& snapshot,
                           const std::vector<bool>* tracked) const {
    const std::uint32_t dim = model_.dim();
    const std::uint32_t vocab_size = model_.vocab().size();
    double sum = 0;
    std::size_t n = 0;
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
      if (tracked != nullptr && !(*tracked)[i]) continue;
      std::span<const float> old_row{
          snapshot.data() + static_cast<std::size_t>(i) * dim, dim};
      sum += row_displacement(old_row, model_.input_vector(i));
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }

  float learning_rate(std::uint64_t processed,
                      std::uint64_t schedule_total) const {
    const double progress =
        static_cast<double>(processed) / static_cast<double>(schedule_total);
    const double lr = config_.initial_lr +
                      (config_.final_lr - config_.initial_lr) * progress;
    return static_cast<float>(std::max<double>(config_.final_lr, lr));
  }

  bool keep_token(std::uint32_t index, Rng& rng) {
    const auto& e = model_.vocab().entry(index);
    const double freq =
        static_cast<double>(e.generic_count + e.domain_count) /
        std::max<std::uint64_t>(1, total_tokens_);
    if (freq <= config_.subsample) return true;
    const double keep = std::sqrt(config_.subsample / freq);
    return rng.next_double() < keep;
  }

  EmbeddingModel& model_;
  TrainConfig config_;
  NegativeTable table_;
  std::uint64_t total_tokens_;
  std::vector<std::vector<std::uint32_t>> validation_docs_;
  std::vector<double> validation_losses_;
};

}  // namespace embdetail

inline Vocabulary build_vocab(
    const std::vector<std::vector<std::string>>& corpus,
    std::uint32_t min_count) {
  return Vocabulary::build(corpus, min_count);
}

struct TrainResult {
  EmbeddingModel model;
  std::vector<double> epoch_losses;
  std::vector<double> validation_losses;  // empty unless a split was set
};

// Trains a CBOW model from scratch on a masked, tokenized corpus. With
// threads == 1 the result is a pure function of (corpus, config, seed).
// config.validation_fraction > 0 holds out every k-th document for a
// per-epoch validation loss (vocabulary still covers the full corpus).
inline TrainResult train_cbow(
    const std::vector<std::vector<std::string>>& corpus,
    const TrainConfig& config) {
  config.validate();
  Vocabulary vocab = Vocabulary::build(corpus, config.min_count);
  auto ids = embdetail::to_ids(corpus, vocab);
  std::vector<std::vector<std::uint32_t>> held_out;
  if (config.validation_fraction > 0 && ids.size() >= 2) {
    const std::size_t stride = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(1.0 /
                                                 config.validation_fraction)));
    std::vector<std::vector<std::uint32_t>> train_ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i % stride == stride - 1)
        held_out.push_back(std::move(ids[i]));
      else
        train_ids.push_back(std::move(ids[i]));
    }
    ids = std::move(train_ids);
  }
  std::size_t pairs = 0;
  for (const auto& doc : ids)
    if (doc.size() >= 2) pairs += doc.size();
  if (pairs == 0)
    throw VocabError("train_cbow: corpus has no (context, target) pairs");
  TrainResult result{EmbeddingModel(std::move(vocab), config), {}, {}};
  embdetail::CbowTrainer trainer(result.model, config);
  if (!held_out.empty()) trainer.set_validation(std::move(held_out));
  result.epoch_losses = trainer.run(ids);
  result.validation_losses = trainer.validation_losses();
  return result;
}

struct DisplacementEntry {
  std::string token;
  std::uint64_t generic_count = 0;
  std::uint64_t domain_count = 0;
  double displacement = 0.0;  // 1 − cosine(before, after), in [0, 2]
};

struct DisplacementReport {
  std::vector<DisplacementEntry> tokens;
  std::vector<double> epoch_mean_displacement;  // over domain-corpus tokens
  std::vector<double> epoch_losses;
};

// Continues training on a domain corpus. Out-of-vocabulary domain tokens
// with count ≥ config.min_count join the vocabulary with fresh random
// input rows. The report pairs both corpus frequencies with each token's
// vector displacement.
inline DisplacementReport fine_tune(
    EmbeddingModel& model, const std::vector<std::vector<std::string>>& corpus,
    const TrainConfig& config) {
  config.validate();
  if (config.dimension != model.dim())
    throw Error("fine_tune: config dimension differs from model");
  const auto added = model.vocab().add_domain_corpus(corpus, config.min_count);
  if (!added.empty()) {
    embdetail::Rng rng(config.seed ^ 0xF1E2D3C4B5A69788ull);
    model.grow(model.vocab().size(), rng);
  }

  const auto ids = embdetail::to_ids(corpus, model.vocab());
  std::vector<float> before(model.input_matrix());

  DisplacementReport report;
  std::vector<bool> in_domain(model.vocab().size(), false);
  for (const auto& doc : ids)
    for (const auto id : doc) in_domain[id] = true;

  bool any_tokens = false;
  for (const auto& doc : ids) any_tokens = any_tokens || !doc.empty();
  if (any_tokens) {
    embdetail::CbowTrainer trainer(model, config);
    report.epoch_losses = trainer.run_tracked(
        ids, &report.epoch_mean_displacement, &in_domain);
  }

  const std::uint32_t dim = model.dim();
  for (std::uint32_t i = 0; i < model.vocab().size(); ++i) {
    const auto& entry = model.vocab().entry(i);
    std::span<const float> old_row{before.data() +
                                       static_cast<std::size_t>(i) * dim,
                                   dim};
    DisplacementEntry d;
    d.token = entry.token;
    d.generic_count = entry.generic_count;
    d.domain_count = entry.domain_count;
    d.displacement = embdetail::row_displacement(old_row, model.input_vector(i));
    report.tokens.push_back(std::move(d));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Binary model format, all integers little-endian:
//   magic "DMEMBED1", u32 version, u32 dim, u64 vocab_size,
//   u32 window, u32 epochs, u32 negatives, u32 min_count, u64 seed,
//   f32 initial_lr, f32 final_lr, f64 subsample,
//   vocab entries (u32 byte length, token bytes, u64 generic, u64 domain),
//   input matrix then output matrix as row-major f32.

namespace embdetail {

constexpr char kModelMagic[8] = {'D', 'M', 'E', 'M', 'B', 'E', 'D', '1'};
constexpr std::uint32_t kModelVersion = 1;

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(std::begin(bytes), std::end(bytes));
#endif
  write_bytes(out, bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw FormatError("model file truncated");
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(std::begin(bytes), std::end(bytes));
#endif
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace embdetail

inline void EmbeddingModel::save(std::ostream& out) const {
  using namespace embdetail;
  write_bytes(out, kModelMagic, sizeof(kModelMagic));
  write_le<std::uint32_t>(out, kModelVersion);
  write_le<std::uint32_t>(out, dim());
  write_le<std::uint64_t>(out, vocab_.size());
  write_le<std::uint32_t>(out, config_.window);
  write_le<std::uint32_t>(out, config_.epochs);
  write_le<std::uint32_t>(out, config_.negatives);
  write_le<std::uint32_t>(out, config_.min_count);
  write_le<std::uint64_t>(out, config_.seed);
  write_le<float>(out, config_.initial_lr);
  write_le<float>(out, config_.final_lr);
  write_le<double>(out, config_.subsample);
  for (const auto& e : vocab_.entries()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.token.size()));
    write_bytes(out, e.token.data(), e.token.size());
    write_le<std::uint64_t>(out, e.generic_count);
    write_le<std::uint64_t>(out, e.domain_count);
  }
  for (float x : input_) write_le<float>(out, x);
  for (float x : output_) write_le<float>(out, x);
  if (!out) throw IoError("model write failed");
}

inline EmbeddingModel EmbeddingModel::load(std::istream& in) {
  using namespace embdetail;
  char magic[sizeof(kModelMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw FormatError("not a model file (bad magic)");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kModelVersion)
    throw FormatError("unsupported model version " + std::to_string(version));
  EmbeddingModel model;
  model.config_.dimension = read_le<std::uint32_t>(in);
  const auto vocab_size = read_le<std::uint64_t>(in);
  model.config_.window = read_le<std::uint32_t>(in);
  model.config_.epochs = read_le<std::uint32_t>(in);
  model.config_.negatives = read_le<std::uint32_t>(in);
  model.config_.min_count = read_le<std::uint32_t>(in);
  model.config_.seed = read_le<std::uint64_t>(in);
  model.config_.initial_lr = read_le<float>(in);
  model.config_.final_lr = read_le<float>(in);
  model.config_.subsample = read_le<double>(in);
  if (model.config_.dimension == 0)
    throw FormatError("model dimension must be positive");
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    const auto len = read_le<std::uint32_t>(in);
    std::string token(len, '\0');
    in.read(token.data(), len);
    if (!in) throw FormatError("model file truncated");
    VocabEntry e;
    e.token = std::move(token);
    e.generic_count = read_le<std::uint64_t>(in);
    e.domain_count = read_le<std::uint64_t>(in);
    model.vocab_.append(std::move(e));
  }
  const std::size_t cells =
      static_cast<std::size_t>(vocab_size) * model.config_.dimension;
  model.input_.resize(cells);
  model.output_.resize(cells);
  for (auto& x : model.input_) x = read_le<float>(in);
  for (auto& x : model.output_) x = read_le<float>(in);
  return model;
}

}  // namespace dibmine::embed
