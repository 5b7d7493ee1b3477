#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pbsv/closed_form.hpp"
#include "pbsv/corpus.hpp"
#include "pbsv/matrix.hpp"
#include "pbsv/random.hpp"

namespace pbsv {

/// Product of isotropic Gaussian experts N(means[j], vars[j] I).
struct PoEPrior {
  std::vector<std::vector<double>> means;
  std::vector<double> vars;

  /// One expert per token of `sentence`, centered at the prior-role vectors.
  static PoEPrior from_sentence(std::span<const WordId> sentence,
                                const EmbeddingMatrix& prior_vectors, double sigma2_p);
  static PoEPrior from_sentence(std::span<const WordId> sentence,
                                const EmbeddingMatrix& prior_vectors,
                                std::span<const double> per_token_vars);

  std::size_t size() const { return means.size(); }
  std::size_t dim() const { return means.empty() ? 0 : means.front().size(); }
  void validate() const;
};

/// KL(N(mu_q, var_q I) || N(p_mean, p_var I)).
double gaussian_kl(const GaussianPosterior& q, std::span<const double> p_mean, double p_var);

/// Σ_j KL(q || expert_j). Differs from KL(q || normalized PoE) by terms that
/// do not involve mu_q; see kl_to_poe_exact for the true divergence.
double kl_to_poe_upto_const(const GaussianPosterior& q, const PoEPrior& prior);

/// The normalized product of experts, itself an isotropic Gaussian with
/// precision Σ 1/vars and precision-weighted mean.
GaussianPosterior poe_distribution(const PoEPrior& prior);

/// KL(q || normalized PoE), exact.
double kl_to_poe_exact(const GaussianPosterior& q, const PoEPrior& prior);

/// (1 - exp(-(λ/n) r - (kl - ln δ)/n)) / (1 - exp(-λ/n)), r already in [0, 1].
double catoni_bound(double emp_risk, double kl, double lambda, std::uint64_t n, double delta);

struct BoundReport {
  double emp_risk = 0.0;  // rescaled to [0, 1]
  double kl = 0.0;
  double lambda = 1.0;
  std::uint64_t n = 1;
  double delta = 0.05;
  double ell_max = 1.0;
  double bound = 0.0;
};

/// Rescales a raw empirical risk by ell_max and evaluates the bound.
/// Throws if raw_emp_risk / ell_max falls outside [0, 1]; nothing is clipped.
BoundReport make_bound_report(double raw_emp_risk, double kl, double lambda, std::uint64_t n,
                              double delta, double ell_max = 1.0);

/// Unigram language model with a Dirichlet prior and a noise distribution.
struct GenerativeModelSpec {
  std::vector<double> gamma;  // Dirichlet concentration, one per word
  double pi = 0.5;            // P(y = +1) at test time
  NoiseTable noise;
  std::size_t k = 1;  // negatives per positive in the training set

  std::size_t vocab_size() const { return gamma.size(); }
  void validate() const;
};

struct LabeledWord {
  WordId word = 0;
  int label = 1;  // +1 or -1
};

struct GenerativeSample {
  std::vector<double> phi;         // drawn word distribution
  Sentence sentence;               // the positives, in draw order
  std::vector<LabeledWord> data;   // |S| positives then k|S| negatives
};

/// φ ~ Dirichlet(γ); |S| = sentence_len words from φ labeled +1, and
/// k·sentence_len words from the noise distribution labeled -1.
GenerativeSample sample_generative_dataset(const GenerativeModelSpec& spec,
                                           std::size_t sentence_len, Rng& rng);

/// Draws (w, y) from the test distribution: y = +1 w.p. π, then w ~ φ or p_n.
class TestSampler {
 public:
  TestSampler(const GenerativeModelSpec& spec, std::vector<double> phi);
  LabeledWord draw(Rng& rng) const;

 private:
  const GenerativeModelSpec* spec_;
  mutable std::discrete_distribution<WordId> topic_;
};

/// Monte-Carlo Gibbs risk: mean zero-one loss of sign(h·W[w]) with h ~ q,
/// sign(0) = +1.
double estimate_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                     std::span<const LabeledWord> data, std::size_t mc_samples, Rng& rng);

/// Same quantity in closed form: each margin h·W[w] is Gaussian.
double expected_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                     std::span<const LabeledWord> data);

/// Generalization risk under the test distribution, enumerated over the vocabulary.
double true_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                 const GenerativeModelSpec& spec, std::span<const double> phi);

struct BoundCheckSetup {
  GenerativeModelSpec model;
  EmbeddingMatrix hypothesis;  // W, one row per word
  EmbeddingMatrix prior_vectors;
  double sigma2_p = 1.0;
  std::size_t sentence_len = 10;
};

using PosteriorFit =
    std::function<GaussianPosterior(const GenerativeSample&, const PoEPrior&, Rng&)>;

/// Posterior centered at the mean of the experts' means with variance σ²_P.
PosteriorFit fixed_prior_fit(double sigma2_p);

struct BoundCheckReport {
  std::size_t trials = 0;
  double delta = 0.0;
  double lambda = 0.0;
  double violation_rate = 0.0;
  double mean_bound = 0.0;
  double mean_true_risk = 0.0;
  double mean_emp_risk = 0.0;
  double mean_kl = 0.0;
};

/// Repeats sample -> fit -> bound -> exact true risk and reports how often the
/// true risk exceeded the bound. Trial t uses the rng stream derive_seed(seed, t),
/// so the result does not depend on `threads`.
BoundCheckReport verify_bound(const BoundCheckSetup& setup, std::size_t trials, double delta,
                              double lambda, const PosteriorFit& fit, std::uint64_t seed,
                              std::size_t threads = 1);

/// Random setup for the CLI and tests: Gaussian word vectors with entries
/// N(0, 1/d), symmetric Dirichlet(gamma), uniform noise counts.
BoundCheckSetup make_synthetic_setup(std::size_t vocab_size, std::size_t dim, double gamma,
                                     double pi, std::size_t k, double sigma2_p,
                                     std::size_t sentence_len, std::uint64_t seed);

}  // namespace pbsv
