#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pbsv/random.hpp"

namespace pbsv {

using WordId = std::uint32_t;
using Sentence = std::vector<WordId>;

/// Lowercases and splits on everything that is not an ASCII letter.
/// Digits are separators, not spelled out.
std::vector<std::string> normalize_text(std::string_view raw);

/// Word <-> dense id map. Ids are ordered by descending frequency, ties broken
/// lexicographically, so construction is deterministic.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Counts `tokens` and keeps words seen at least `min_count` times.
  /// Throws std::invalid_argument("empty vocabulary") when nothing survives.
  static Vocabulary build(std::span<const std::string> tokens, std::int64_t min_count);

  /// Keeps the given order as the id order (e.g. rows of an embedding file).
  static Vocabulary from_words(std::vector<std::string> words,
                               std::vector<std::int64_t> freqs = {});

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(id); }
  std::int64_t freq(WordId id) const { return freqs_.at(id); }
  std::int64_t total_tokens() const { return total_tokens_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::int64_t>& freqs() const { return freqs_; }

  /// Maps tokens to ids; out-of-vocabulary tokens are dropped.
  Sentence encode(std::span<const std::string> tokens) const;

  /// `word<TAB>freq` per line in id order.
  void write_tsv(std::ostream& out) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<std::string, WordId> index_;
  std::int64_t total_tokens_ = 0;
};

/// Encoded target-task sentences plus document frequencies.
struct SentenceDataset {
  std::vector<Sentence> sentences;
  std::vector<std::int64_t> doc_freq;  // indexed by word id, size V

  std::size_t n_sentences() const { return sentences.size(); }

  static SentenceDataset from_sentences(std::vector<Sentence> sentences,
                                        std::size_t vocab_size);

  /// Token counts per word id over all sentences.
  std::vector<std::int64_t> unigram_counts() const;
};

/// IDF(w) = ln(N_S / doc_freq(w)) + 1.
class IdfTable {
 public:
  IdfTable() = default;
  explicit IdfTable(std::vector<double> values) : values_(std::move(values)) {}

  bool contains(WordId w) const;
  /// Throws std::out_of_range("word unseen in sentence collection").
  double at(WordId w) const;
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;  // NaN for words with doc_freq == 0
};

IdfTable compute_idf(const SentenceDataset& dataset);

/// Keeps each occurrence with probability min(1, sqrt(t / f(w))), f(w) = freq/total.
double keep_probability(const Vocabulary& vocab, WordId w, double t);
Sentence subsample_tokens(std::span<const WordId> tokens, const Vocabulary& vocab,
                          double t, Rng& rng);

/// Walker alias table over word ids for p(w) ∝ weight(w)^power.
class NoiseTable {
 public:
  NoiseTable() = default;
  NoiseTable(std::span<const std::int64_t> counts, double power);

  WordId sample(Rng& rng) const;
  double probability(WordId w) const { return probs_.at(w); }
  std::size_t size() const { return probs_.size(); }
  double power() const { return power_; }

 private:
  std::vector<double> probs_;
  std::vector<double> accept_;
  std::vector<WordId> alias_;
  double power_ = 0.75;
};

NoiseTable build_noise_table(const Vocabulary& vocab, double power);

}  // namespace pbsv
