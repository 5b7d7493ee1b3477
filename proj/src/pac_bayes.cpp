#include "pbsv/pac_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace pbsv {

PoEPrior PoEPrior::from_sentence(std::span<const WordId> sentence,
                                 const EmbeddingMatrix& prior_vectors, double sigma2_p) {
  std::vector<double> vars(sentence.size(), sigma2_p);
  return from_sentence(sentence, prior_vectors, vars);
}

PoEPrior PoEPrior::from_sentence(std::span<const WordId> sentence,
                                 const EmbeddingMatrix& prior_vectors,
                                 std::span<const double> per_token_vars) {
  require_same_dim(sentence.size(), per_token_vars.size(), "per-token prior variances");
  PoEPrior p;
  for (std::size_t j = 0; j < sentence.size(); ++j) {
    const auto row = prior_vectors.row(sentence[j]);
    p.means.emplace_back(row.begin(), row.end());
    p.vars.push_back(per_token_vars[j]);
  }
  p.validate();
  return p;
}

void PoEPrior::validate() const {
  if (means.empty()) throw std::invalid_argument("empty product-of-experts prior");
  require_same_dim(means.size(), vars.size(), "prior means vs variances");
  for (std::size_t j = 0; j < means.size(); ++j) {
    require_same_dim(means[j].size(), means.front().size(), "prior mean");
    if (!(vars[j] > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  }
}

double gaussian_kl(const GaussianPosterior& q, std::span<const double> p_mean, double p_var) {
  require_same_dim(q.dim(), p_mean.size(), "prior mean");
  if (!(q.var > 0.0) || !(p_var > 0.0)) throw std::invalid_argument("variances must be > 0");
  const double d = static_cast<double>(q.dim());
  const double ratio = q.var / p_var;
  return squared_distance(q.mu, p_mean) / (2.0 * p_var) +
         0.5 * d * (-std::log(ratio) - 1.0 + ratio);
}

double kl_to_poe_upto_const(const GaussianPosterior& q, const PoEPrior& prior) {
  prior.validate();
  double total = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    total += gaussian_kl(q, prior.means[j], prior.vars[j]);
  }
  return total;
}

GaussianPosterior poe_distribution(const PoEPrior& prior) {
  prior.validate();
  const std::size_t d = prior.dim();
  double precision = 0.0;
  std::vector<double> weighted(d, 0.0);
  for (std::size_t j = 0; j < prior.size(); ++j) {
    precision += 1.0 / prior.vars[j];
    axpy(1.0 / prior.vars[j], prior.means[j], weighted);
  }
  GaussianPosterior p;
  p.var = 1.0 / precision;
  p.mu.resize(d);
  for (std::size_t i = 0; i < d; ++i) p.mu[i] = weighted[i] / precision;
  return p;
}

double kl_to_poe_exact(const GaussianPosterior& q, const PoEPrior& prior) {
  const GaussianPosterior p = poe_distribution(prior);
  return gaussian_kl(q, p.mu, p.var);
}

double catoni_bound(double emp_risk, double kl, double lambda, std::uint64_t n, double delta) {
  if (!(emp_risk >= 0.0 && emp_risk <= 1.0)) throw std::invalid_argument("empirical risk must lie in [0, 1]");
  if (!(kl >= 0.0)) throw std::invalid_argument("KL must be >= 0");
  if (!(lambda > 0.0) || std::isinf(lambda)) throw std::invalid_argument("lambda must be finite and > 0");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  const double nn = static_cast<double>(n);
  const double exponent = -(lambda / nn) * emp_risk - (kl - std::log(delta)) / nn;
  return -std::expm1(exponent) / -std::expm1(-lambda / nn);
}

BoundReport make_bound_report(double raw_emp_risk, double kl, double lambda, std::uint64_t n,
                              double delta, double ell_max) {
  if (!(ell_max > 0.0)) throw std::invalid_argument("ell_max must be > 0");
  BoundReport r;
  r.emp_risk = raw_emp_risk / ell_max;
  r.kl = kl;
  r.lambda = lambda;
  r.n = n;
  r.delta = delta;
  r.ell_max = ell_max;
  r.bound = catoni_bound(r.emp_risk, kl, lambda, n, delta);
  return r;
}

void GenerativeModelSpec::validate() const {
  if (gamma.empty()) throw std::invalid_argument("generative model over empty vocabulary");
  for (const double g : gamma) {
    if (!(g > 0.0)) throw std::invalid_argument("Dirichlet concentration must be > 0");
  }
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("pi must lie in (0, 1)");
  if (noise.size() != gamma.size()) throw std::invalid_argument("noise table size differs from vocabulary");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
}

GenerativeSample sample_generative_dataset(const GenerativeModelSpec& spec,
                                           std::size_t sentence_len, Rng& rng) {
  spec.validate();
  if (sentence_len < 1) throw std::invalid_argument("sentence_len must be >= 1");
  GenerativeSample out;
  out.phi.resize(spec.vocab_size());
  double total = 0.0;
  for (std::size_t w = 0; w < out.phi.size(); ++w) {
    out.phi[w] = std::gamma_distribution<double>(spec.gamma[w], 1.0)(rng);
    total += out.phi[w];
  }
  if (!(total > 0.0)) {
    // All gamma draws underflowed (tiny concentrations); fall back to one word.
    out.phi.assign(out.phi.size(), 0.0);
    out.phi[std::uniform_int_distribution<std::size_t>(0, out.phi.size() - 1)(rng)] = 1.0;
    total = 1.0;
  }
  for (auto& p : out.phi) p /= total;

  std::discrete_distribution<WordId> topic(out.phi.begin(), out.phi.end());
  out.data.reserve(sentence_len * (1 + spec.k));
  for (std::size_t i = 0; i < sentence_len; ++i) {
    const WordId w = topic(rng);
    out.sentence.push_back(w);
    out.data.push_back({w, 1});
  }
  for (std::size_t i = 0; i < spec.k * sentence_len; ++i) {
    out.data.push_back({spec.noise.sample(rng), -1});
  }
  return out;
}

TestSampler::TestSampler(const GenerativeModelSpec& spec, std::vector<double> phi)
    : spec_(&spec), topic_(phi.begin(), phi.end()) {
  spec.validate();
  require_same_dim(phi.size(), spec.vocab_size(), "word distribution");
}

LabeledWord TestSampler::draw(Rng& rng) const {
  const bool positive = std::bernoulli_distribution(spec_->pi)(rng);
  if (positive) return {topic_(rng), 1};
  return {spec_->noise.sample(rng), -1};
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P[sign(h·x) != label] for h ~ N(mu, var I), sign(0) = +1.
double misclassification_probability(const GaussianPosterior& q, std::span<const double> x,
                                     int label) {
  const double margin = dot(q.mu, x);
  const double sd = std::sqrt(q.var * squared_norm(x));
  double p_negative;  // P[h·x < 0]
  if (sd == 0.0) {
    p_negative = margin < 0.0 ? 1.0 : 0.0;
  } else {
    p_negative = normal_cdf(-margin / sd);
  }
  return label > 0 ? p_negative : 1.0 - p_negative;
}

void check_risk_inputs(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                       std::span<const LabeledWord> data) {
  if (data.empty()) throw std::invalid_argument("empty labeled data");
  require_same_dim(q.dim(), hypothesis.dim(), "posterior vs hypothesis vectors");
  if (!(q.var >= 0.0)) throw std::invalid_argument("posterior variance must be >= 0");
  for (const auto& ex : data) {
    if (ex.word >= hypothesis.vocab_size()) throw std::out_of_range("word id outside vocabulary");
  }
}

}  // namespace

double estimate_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                     std::span<const LabeledWord> data, std::size_t mc_samples, Rng& rng) {
  check_risk_inputs(q, hypothesis, data);
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  const double sd = std::sqrt(q.var);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> h(q.dim());
  std::uint64_t errors = 0;
  for (std::size_t s = 0; s < mc_samples; ++s) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = q.mu[i] + sd * normal(rng);
    for (const auto& ex : data) {
      const int predicted = dot(h, hypothesis.row(ex.word)) >= 0.0 ? 1 : -1;
      errors += predicted != ex.label;
    }
  }
  return static_cast<double>(errors) /
         (static_cast<double>(mc_samples) * static_cast<double>(data.size()));
}

double expected_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                     std::span<const LabeledWord> data) {
  check_risk_inputs(q, hypothesis, data);
  double total = 0.0;
  for (const auto& ex : data) {
    total += misclassification_probability(q, hypothesis.row(ex.word), ex.label);
  }
  return total / static_cast<double>(data.size());
}

double true_risk(const GaussianPosterior& q, const EmbeddingMatrix& hypothesis,
                 const GenerativeModelSpec& spec, std::span<const double> phi) {
  spec.validate();
  require_same_dim(phi.size(), spec.vocab_size(), "word distribution");
  require_same_dim(hypothesis.vocab_size(), spec.vocab_size(), "hypothesis rows");
  double risk = 0.0;
  for (std::size_t w = 0; w < phi.size(); ++w) {
    const auto x = hypothesis.row(w);
    risk += spec.pi * phi[w] * misclassification_probability(q, x, 1);
    risk += (1.0 - spec.pi) * spec.noise.probability(static_cast<WordId>(w)) *
            misclassification_probability(q, x, -1);
  }
  return risk;
}

PosteriorFit fixed_prior_fit(double sigma2_p) {
  if (!(sigma2_p > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  return [sigma2_p](const GenerativeSample&, const PoEPrior& prior, Rng&) {
    GaussianPosterior q;
    q.mu.assign(prior.dim(), 0.0);
    for (const auto& m : prior.means) axpy(1.0, m, q.mu);
    for (auto& x : q.mu) x /= static_cast<double>(prior.size());
    q.var = sigma2_p;
    return q;
  };
}

BoundCheckReport verify_bound(const BoundCheckSetup& setup, std::size_t trials, double delta,
                              double lambda, const PosteriorFit& fit, std::uint64_t seed,
                              std::size_t threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  setup.model.validate();
  require_same_dim(setup.hypothesis.vocab_size(), setup.model.vocab_size(), "hypothesis rows");
  require_same_dim(setup.prior_vectors.vocab_size(), setup.model.vocab_size(), "prior rows");

  struct Trial {
    double bound, true_risk, emp_risk, kl;
  };
  std::vector<Trial> results(trials);
  const std::uint64_t n = setup.sentence_len * (1 + setup.model.k);

  auto run = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    const GenerativeSample sample = sample_generative_dataset(setup.model, setup.sentence_len, rng);
    const PoEPrior prior =
        PoEPrior::from_sentence(sample.sentence, setup.prior_vectors, setup.sigma2_p);
    const GaussianPosterior q = fit(sample, prior, rng);
    Trial& r = results[t];
    r.emp_risk = expected_risk(q, setup.hypothesis, sample.data);
    r.kl = kl_to_poe_exact(q, prior);
    r.bound = catoni_bound(r.emp_risk, r.kl, lambda, n, delta);
    r.true_risk = true_risk(q, setup.hypothesis, setup.model, sample.phi);
  };

  const std::size_t workers = std::min(threads, trials);
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) run(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < trials; t += workers) run(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  BoundCheckReport rep;
  rep.trials = trials;
  rep.delta = delta;
  rep.lambda = lambda;
  std::size_t violations = 0;
  for (const auto& r : results) {
    violations += r.true_risk > r.bound;
    rep.mean_bound += r.bound;
    rep.mean_true_risk += r.true_risk;
    rep.mean_emp_risk += r.emp_risk;
    rep.mean_kl += r.kl;
  }
  const double nt = static_cast<double>(trials);
  rep.violation_rate = static_cast<double>(violations) / nt;
  rep.mean_bound /= nt;
  rep.mean_true_risk /= nt;
  rep.mean_emp_risk /= nt;
  rep.mean_kl /= nt;
  return rep;
}

BoundCheckSetup make_synthetic_setup(std::size_t vocab_size, std::size_t dim, double gamma,
                                     double pi, std::size_t k, double sigma2_p,
                                     std::size_t sentence_len, std::uint64_t seed) {
  if (vocab_size < 1 || dim < 1) throw std::invalid_argument("vocab_size and dim must be >= 1");
  Rng rng(derive_seed(seed, 0xB0));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  BoundCheckSetup s;
  s.hypothesis.role = EmbeddingRole::input;
  s.hypothesis.values = Matrix(vocab_size, dim);
  s.prior_vectors.role = EmbeddingRole::output;
  s.prior_vectors.values = Matrix(vocab_size, dim);
  for (auto& x : s.hypothesis.values.data()) x = normal(rng);
  for (auto& x : s.prior_vectors.values.data()) x = normal(rng);
  s.model.gamma.assign(vocab_size, gamma);
  s.model.pi = pi;
  s.model.k = k;
  const std::vector<std::int64_t> counts(vocab_size, 1);
  s.model.noise = NoiseTable(counts, 0.75);
  s.sigma2_p = sigma2_p;
  s.sentence_len = sentence_len;
  s.model.validate();
  return s;
}

}  // namespace pbsv
