#include "pbsv/skipgram.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace pbsv {

void SkipgramConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(lr0 >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (!(power > 0.0)) throw std::invalid_argument("noise power must be > 0");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double neg_loss(std::span<const double> i_vec, std::span<const double> o_pos,
                std::span<const std::span<const double>> o_negs) {
  require_same_dim(i_vec.size(), o_pos.size(), "positive output vector");
  double loss = -log_sigmoid(dot(i_vec, o_pos));
  for (const auto& o : o_negs) {
    require_same_dim(i_vec.size(), o.size(), "negative output vector");
    loss -= log_sigmoid(-dot(i_vec, o));
  }
  return loss;
}

double neg_loss_grad(std::span<const double> i_vec, std::span<const double> o_pos,
                     std::span<const std::span<const double>> o_negs,
                     std::span<double> grad) {
  require_same_dim(i_vec.size(), grad.size(), "gradient buffer");
  std::fill(grad.begin(), grad.end(), 0.0);
  require_same_dim(i_vec.size(), o_pos.size(), "positive output vector");
  const double f = dot(i_vec, o_pos);
  double loss = -log_sigmoid(f);
  axpy(-(1.0 - sigmoid(f)), o_pos, grad);
  for (const auto& o : o_negs) {
    require_same_dim(i_vec.size(), o.size(), "negative output vector");
    const double g = dot(i_vec, o);
    loss -= log_sigmoid(-g);
    axpy(sigmoid(g), o, grad);
  }
  return loss;
}

std::vector<WordId> extract_contexts(std::span<const WordId> sentence, std::size_t t,
                                     std::size_t window, Rng& rng) {
  if (t >= sentence.size()) throw std::out_of_range("target position outside sentence");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const std::size_t b = std::uniform_int_distribution<std::size_t>(1, window)(rng);
  const std::size_t lo = t >= b ? t - b : 0;
  const std::size_t hi = std::min(sentence.size() - 1, t + b);
  std::vector<WordId> bag;
  bag.reserve(hi - lo);
  for (std::size_t j = lo; j <= hi; ++j) {
    if (j != t) bag.push_back(sentence[j]);
  }
  return bag;
}

std::optional<WordId> draw_negative(const NoiseTable& noise, WordId positive, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const WordId n = noise.sample(rng);
    if (n != positive) return n;
  }
  return std::nullopt;
}

std::vector<Sentence> chunk_stream(std::span<const WordId> stream, std::size_t max_len) {
  std::vector<Sentence> out;
  for (std::size_t pos = 0; pos < stream.size(); pos += max_len) {
    const std::size_t end = std::min(stream.size(), pos + max_len);
    out.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(pos),
                     stream.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

namespace {

struct LossTally {
  double sum = 0.0;
  std::uint64_t pairs = 0;
};

// One SGD step on neg_loss(input[target], output[context]) with k noise draws.
void sgns_update(Matrix& input, Matrix& output, WordId target, WordId context,
                 const NoiseTable& noise, std::size_t k, double lr, Rng& rng,
                 std::vector<double>& neu1e, LossTally& tally) {
  auto in = input.row(target);
  std::fill(neu1e.begin(), neu1e.end(), 0.0);

  auto apply = [&](WordId word, double label) {
    auto out = output.row(word);
    const double f = dot(in, out);
    tally.sum -= label > 0.0 ? log_sigmoid(f) : log_sigmoid(-f);
    const double g = (label - sigmoid(f)) * lr;
    axpy(g, out, neu1e);
    axpy(g, in, out);
  };

  apply(context, 1.0);
  for (std::size_t n = 0; n < k; ++n) {
    if (const auto neg = draw_negative(noise, context, rng)) apply(*neg, 0.0);
  }
  axpy(1.0, neu1e, in);
  ++tally.pairs;
}

}  // namespace

SkipgramResult train_skipgram(std::span<const Sentence> corpus, const Vocabulary& vocab,
                              const SkipgramConfig& config) {
  config.validate();
  if (vocab.empty()) throw std::invalid_argument("empty vocabulary");
  std::uint64_t total_tokens = 0;
  bool has_pair = false;
  for (const auto& s : corpus) {
    total_tokens += s.size();
    has_pair = has_pair || s.size() >= 2;
  }
  if (total_tokens == 0) throw std::invalid_argument("empty corpus");
  if (!has_pair) throw std::invalid_argument("corpus has no (target, context) pair");

  const std::size_t V = vocab.size();
  const std::size_t d = config.dim;
  SkipgramResult result;
  result.input.role = EmbeddingRole::input;
  result.output.role = EmbeddingRole::output;
  result.input.values = Matrix(V, d);
  result.output.values = Matrix(V, d, 0.0);
  {
    Rng init_rng(derive_seed(config.seed, 0));
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                                0.5 / static_cast<double>(d));
    for (auto& x : result.input.values.data()) x = init(init_rng);
  }

  const NoiseTable noise = build_noise_table(vocab, config.power);
  const double scheduled = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  std::atomic<std::uint64_t> processed{0};
  const std::size_t n_threads = std::min<std::size_t>(config.threads, corpus.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<LossTally> tallies(n_threads);

    auto worker = [&](std::size_t tid) {
      Rng rng(derive_seed(config.seed, 1 + epoch * n_threads + tid));
      std::vector<double> neu1e(d);
      LossTally& tally = tallies[tid];
      const std::size_t begin = corpus.size() * tid / n_threads;
      const std::size_t end = corpus.size() * (tid + 1) / n_threads;
      for (std::size_t si = begin; si < end; ++si) {
        const Sentence& raw = corpus[si];
        const double progress = static_cast<double>(processed.load()) / scheduled;
        const double lr = config.lr0 * std::max(1e-4, 1.0 - progress);
        const Sentence seq = config.subsample > 0.0
                                 ? subsample_tokens(raw, vocab, config.subsample, rng)
                                 : raw;
        for (std::size_t t = 0; t < seq.size(); ++t) {
          for (const WordId c : extract_contexts(seq, t, config.window, rng)) {
            sgns_update(result.input.values, result.output.values, seq[t], c, noise,
                        config.negatives, lr, rng, neu1e, tally);
          }
        }
        processed.fetch_add(raw.size());
      }
    };

    if (n_threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t tid = 0; tid < n_threads; ++tid) pool.emplace_back(worker, tid);
      for (auto& th : pool) th.join();
    }

    LossTally total;
    for (const auto& t : tallies) {
      total.sum += t.sum;
      total.pairs += t.pairs;
    }
    result.epoch_mean_loss.push_back(
        total.pairs > 0 ? total.sum / static_cast<double>(total.pairs) : 0.0);
  }
  return result;
}

}  // namespace pbsv
