#include "pbsv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace pbsv {

std::vector<std::string> normalize_text(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      current.push_back(static_cast<char>(c | 0x20));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::build(std::span<const std::string> tokens, std::int64_t min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& t : tokens) ++counts[t];

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [word, n] : counts) {
    if (n >= min_count) kept.emplace_back(word, n);
  }
  if (kept.empty()) throw std::invalid_argument("empty vocabulary");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  std::vector<std::string> words;
  std::vector<std::int64_t> freqs;
  words.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [w, n] : kept) {
    words.push_back(std::move(w));
    freqs.push_back(n);
  }
  return from_words(std::move(words), std::move(freqs));
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words,
                                  std::vector<std::int64_t> freqs) {
  if (freqs.empty()) freqs.assign(words.size(), 0);
  if (freqs.size() != words.size()) {
    throw std::invalid_argument("word and frequency lists differ in length");
  }
  Vocabulary v;
  v.index_.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!v.index_.emplace(words[i], static_cast<WordId>(i)).second) {
      throw std::invalid_argument("duplicate word in vocabulary: " + words[i]);
    }
    v.total_tokens_ += freqs[i];
  }
  v.words_ = std::move(words);
  v.freqs_ = std::move(freqs);
  return v;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Sentence Vocabulary::encode(std::span<const std::string> tokens) const {
  Sentence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (const auto id = find(t)) out.push_back(*id);
  }
  return out;
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << freqs_[i] << '\n';
  }
}

SentenceDataset SentenceDataset::from_sentences(std::vector<Sentence> sentences,
                                                std::size_t vocab_size) {
  SentenceDataset ds;
  ds.doc_freq.assign(vocab_size, 0);
  std::vector<std::size_t> last_seen(vocab_size, std::numeric_limits<std::size_t>::max());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (const WordId w : sentences[s]) {
      if (w >= vocab_size) throw std::out_of_range("token id outside vocabulary");
      if (last_seen[w] != s) {
        last_seen[w] = s;
        ++ds.doc_freq[w];
      }
    }
  }
  ds.sentences = std::move(sentences);
  return ds;
}

std::vector<std::int64_t> SentenceDataset::unigram_counts() const {
  std::vector<std::int64_t> counts(doc_freq.size(), 0);
  for (const auto& s : sentences) {
    for (const WordId w : s) ++counts[w];
  }
  return counts;
}

bool IdfTable::contains(WordId w) const {
  return w < values_.size() && !std::isnan(values_[w]);
}

double IdfTable::at(WordId w) const {
  if (!contains(w)) throw std::out_of_range("word unseen in sentence collection");
  return values_[w];
}

IdfTable compute_idf(const SentenceDataset& dataset) {
  if (dataset.n_sentences() == 0) throw std::invalid_argument("no sentences for IDF");
  const double n = static_cast<double>(dataset.n_sentences());
  std::vector<double> idf(dataset.doc_freq.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t w = 0; w < idf.size(); ++w) {
    if (dataset.doc_freq[w] > 0) {
      idf[w] = std::log(n / static_cast<double>(dataset.doc_freq[w])) + 1.0;
    }
  }
  return IdfTable(std::move(idf));
}

double keep_probability(const Vocabulary& vocab, WordId w, double t) {
  const double f =
      static_cast<double>(vocab.freq(w)) / static_cast<double>(vocab.total_tokens());
  if (f <= t) return 1.0;
  return std::min(1.0, std::sqrt(t / f));
}

Sentence subsample_tokens(std::span<const WordId> tokens, const Vocabulary& vocab,
                          double t, Rng& rng) {
  if (!(t > 0.0)) throw std::invalid_argument("subsampling threshold must be > 0");
  Sentence kept;
  kept.reserve(tokens.size());
  for (const WordId w : tokens) {
    const double p = keep_probability(vocab, w, t);
    if (p >= 1.0 || uniform01(rng) < p) kept.push_back(w);
  }
  return kept;
}

NoiseTable::NoiseTable(std::span<const std::int64_t> counts, double power) : power_(power) {
  if (counts.empty()) throw std::invalid_argument("noise table over empty vocabulary");
  if (!(power > 0.0)) throw std::invalid_argument("noise power must be > 0");
  const std::size_t n = counts.size();
  probs_.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] < 0) throw std::invalid_argument("negative count in noise table");
    probs_[i] = counts[i] > 0 ? std::pow(static_cast<double>(counts[i]), power) : 0.0;
    total += probs_[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("noise table has no mass");
  for (auto& p : probs_) p /= total;

  // Vose's alias construction.
  accept_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<WordId> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probs_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<WordId>(i));
  }
  while (!small.empty() && !large.empty()) {
    const WordId s = small.back();
    small.pop_back();
    const WordId l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (const WordId l : large) accept_[l] = 1.0;
  // Leftovers in `small` are rounding residue; they carry (almost) full mass.
  const auto heaviest =
      static_cast<WordId>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
  for (const WordId s : small) {
    accept_[s] = probs_[s] > 0.0 ? 1.0 : 0.0;
    alias_[s] = heaviest;
  }
}

WordId NoiseTable::sample(Rng& rng) const {
  const std::size_t n = accept_.size();
  const double u = uniform01(rng) * static_cast<double>(n);
  auto column = static_cast<std::size_t>(u);
  if (column >= n) column = n - 1;
  const double frac = u - static_cast<double>(column);
  return frac < accept_[column] ? static_cast<WordId>(column) : alias_[column];
}

NoiseTable build_noise_table(const Vocabulary& vocab, double power) {
  if (vocab.empty()) throw std::invalid_argument("noise table over empty vocabulary");
  return NoiseTable(vocab.freqs(), power);
}

}  // namespace pbsv
