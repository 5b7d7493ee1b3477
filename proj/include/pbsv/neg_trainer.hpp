#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbsv/closed_form.hpp"
#include "pbsv/corpus.hpp"
#include "pbsv/matrix.hpp"
#include "pbsv/pac_bayes.hpp"

namespace pbsv {

struct NegTrainConfig {
  double lambda = 1.0;  // +inf allowed
  double sigma2_p = 1.0;  // PB-neg prior variance; w-PB-neg uses freq_prior_variance
  std::size_t negatives = 15;
  std::size_t epochs = 40;
  double lr0 = 0.025;
  std::size_t mc_samples = 1;
  double power = 0.75;
  std::uint64_t seed = 1;
  RoleAssignment role = RoleAssignment::standard;
  std::size_t threads = 1;

  // Test hooks.
  bool collapse_variance = false;  // h = mu exactly; log-variance never updated
  EmbeddingMatrix* trainable_hypothesis = nullptr;  // PB-neg: update these rows too
  bool eager_regularizer = false;  // w-PB-neg: regularize every word at every step

  void validate() const;
  /// lr0 * max(1e-4, 1 - epoch / epochs).
  double learning_rate(std::size_t epoch) const;
};

/// Per-row Gaussian posteriors, parameterized by log-variance so var > 0.
struct PosteriorBank {
  Matrix mu;
  std::vector<double> log_var;
  /// Cumulative learning-rate time up to which the regularizer has been
  /// applied to each row (lazy updates).
  std::vector<double> clock;

  std::size_t size() const { return log_var.size(); }
  std::size_t dim() const { return mu.cols(); }
  double var(std::size_t r) const;
  GaussianPosterior posterior(std::size_t r) const;
};

/// `key<TAB>var<TAB>mu_1...mu_d` per row; keys default to row indices.
void write_bank_tsv(std::ostream& out, const PosteriorBank& bank,
                    const std::vector<std::string>* keys = nullptr);

/// σ²_{P_w} = Σ_v freq(v) / freq(w); words with freq 0 are absent.
std::unordered_map<WordId, double> freq_prior_variance(std::span<const std::int64_t> freqs);
std::unordered_map<WordId, double> freq_prior_variance(const Vocabulary& vocab);

/// k negatives per sentence token (row j belongs to token j).
using NegativeDraws = std::vector<std::vector<WordId>>;

struct PosteriorGradient {
  double value = 0.0;
  std::vector<double> grad_mu;
  double grad_log_var = 0.0;
};

/// Per-sentence objective at one reparameterized draw h = mu + sqrt(var) eps:
///   (1/|S|) Σ_w ℓ_neg(h, t_w) + |S|/(2σ²_P λ) ||mu - mean(p)||²
///     + |S| d/(2λ) (ln(σ²_P/var) + var/σ²_P)
/// with t = î, p = ô under the standard role. Gradients are analytic and taken
/// with respect to mu and ln var.
PosteriorGradient pb_neg_objective(const GaussianPosterior& q, std::span<const WordId> sentence,
                                   const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                                   Lambda lambda, double sigma2_p, RoleAssignment role,
                                   std::span<const double> eps, const NegativeDraws& negatives);

/// Distinct words of a sentence with their multiplicities.
struct SentenceBag {
  std::vector<WordId> words;
  std::vector<double> counts;
  std::size_t length = 0;
};
SentenceBag make_bag(std::span<const WordId> sentence);

/// Per-word priors N(means[w], vars[w] I).
struct WordPrior {
  const EmbeddingMatrix* means = nullptr;
  std::vector<double> vars;
};

struct BankGradient {
  double value = 0.0;
  std::vector<WordId> words;  // distinct sentence words
  Matrix grad_mu;             // rows aligned with `words`
  std::vector<double> grad_log_var;
};

/// Word-based objective for one (sentence, target) pair:
///   ℓ_neg((1/|S|) Σ_{v∈S} h_v, t_target) + (1/(2λ)) Σ_{v∈V} [ ||mu_v - p_v||²/σ²_{P_v}
///     + d (ln(σ²_{P_v}/σ²_{Q_v}) + σ²_{Q_v}/σ²_{P_v}) ]
/// with h_v = mu_v + σ_v eps_v; `eps` has one row per bag word. The returned
/// gradient covers the sentence words (data + regularizer); the regularizer
/// gradient of any other word is w_pb_neg_regularizer_grad.
BankGradient w_pb_neg_objective(const PosteriorBank& bank, const WordPrior& prior,
                                std::span<const WordId> sentence, WordId target,
                                const EmbeddingMatrix& hypothesis, Lambda lambda,
                                const Matrix& eps, std::span<const WordId> negatives);

struct RegularizerGradient {
  std::vector<double> grad_mu;
  double grad_log_var = 0.0;
};
RegularizerGradient w_pb_neg_regularizer_grad(const PosteriorBank& bank, const WordPrior& prior,
                                              WordId word, Lambda lambda);

/// Exact flow of the Gaussian KL regularizer over learning-rate time `tau`:
/// mu relaxes toward the prior mean at `mean_rate`, and z = ln var - ln σ²_P
/// follows dz/dt = -log_var_rate (e^z - 1). Flows compose additively in tau,
/// which is what makes lazy application exact.
void relax_mean(std::span<double> mu, std::span<const double> prior_mean, double mean_rate,
                double tau);
double relax_log_var(double log_var, double log_prior_var, double log_var_rate, double tau);

struct PbNegResult {
  PosteriorBank bank;  // one row per sentence
  std::vector<double> epoch_mean_objective;
};

/// SGD with one sentence per step, epochs from cfg. Sentence i draws from its
/// own stream derive_seed(cfg.seed, i), so results do not depend on threads.
PbNegResult train_pb_neg(std::span<const Sentence> sentences, const EmbeddingMatrix& inputs,
                         const EmbeddingMatrix& outputs, const NoiseTable& noise,
                         const NegTrainConfig& cfg);

struct WPbNegResult {
  PosteriorBank bank;  // one row per vocabulary word
  WordPrior prior;
  std::vector<double> epoch_mean_data_loss;
};

/// Word posteriors initialized at the prior (ô_w, σ²_{P_w}) with σ²_{P_w} from
/// the target-sentence frequencies; the full-vocabulary regularizer is applied
/// lazily unless cfg.eager_regularizer is set.
WPbNegResult train_w_pb_neg(std::span<const Sentence> sentences, const EmbeddingMatrix& inputs,
                            const EmbeddingMatrix& outputs, const NoiseTable& noise,
                            const NegTrainConfig& cfg);

/// (1/|S|) Σ_{w∈S} mu_w.
std::vector<double> compose_sentence_vector(const PosteriorBank& bank,
                                            std::span<const WordId> sentence);

/// Bound-check strategy: fits the posterior of the positives with PB-neg.
PosteriorFit pb_neg_fit(const BoundCheckSetup& setup, const NegTrainConfig& cfg);

}  // namespace pbsv
