#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbsv/corpus.hpp"
#include "pbsv/matrix.hpp"
#include "pbsv/random.hpp"

namespace pbsv {

struct SkipgramConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t negatives = 15;
  std::size_t epochs = 5;
  double lr0 = 0.025;
  double subsample = 1e-4;  // <= 0 disables subsampling
  double power = 0.75;
  std::int64_t min_count = 5;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const;
};

/// -[ln σ(i·o_pos) + Σ ln σ(-i·o_n)], stable for large |i·o|.
double neg_loss(std::span<const double> i_vec, std::span<const double> o_pos,
                std::span<const std::span<const double>> o_negs);

/// Gradient of neg_loss with respect to i_vec; writes into `grad`.
double neg_loss_grad(std::span<const double> i_vec, std::span<const double> o_pos,
                     std::span<const std::span<const double>> o_negs,
                     std::span<double> grad);

/// Dynamic window: b ~ U{1..window}, then positions [t-b, t+b] \ {t},
/// truncated at the sequence boundaries.
std::vector<WordId> extract_contexts(std::span<const WordId> sentence, std::size_t t,
                                     std::size_t window, Rng& rng);

/// Draws a noise word different from `positive`; gives up after 100 tries.
std::optional<WordId> draw_negative(const NoiseTable& noise, WordId positive, Rng& rng);

struct SkipgramResult {
  EmbeddingMatrix input;
  EmbeddingMatrix output;
  std::vector<double> epoch_mean_loss;  // mean neg_loss per (target, context) pair
};

/// Skip-gram with negative sampling over pre-encoded sequences. With
/// config.threads == 1 the run is a pure function of the seed; with more
/// threads rows are updated without synchronization.
SkipgramResult train_skipgram(std::span<const Sentence> corpus, const Vocabulary& vocab,
                              const SkipgramConfig& config);

/// Splits a token stream into sequences of at most `max_len` ids.
std::vector<Sentence> chunk_stream(std::span<const WordId> stream, std::size_t max_len = 1000);

}  // namespace pbsv
