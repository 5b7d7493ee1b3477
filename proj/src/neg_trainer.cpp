#include "pbsv/neg_trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "pbsv/io.hpp"
#include "pbsv/skipgram.hpp"

namespace pbsv {

void NegTrainConfig::validate() const {
  Lambda{lambda};
  if (!(sigma2_p > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(lr0 >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
  if (!(power > 0.0)) throw std::invalid_argument("noise power must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double NegTrainConfig::learning_rate(std::size_t epoch) const {
  const double progress = static_cast<double>(epoch) / static_cast<double>(epochs);
  return lr0 * std::max(1e-4, 1.0 - progress);
}

double PosteriorBank::var(std::size_t r) const { return std::exp(log_var.at(r)); }

GaussianPosterior PosteriorBank::posterior(std::size_t r) const {
  const auto row = mu.row(r);
  return {std::vector<double>(row.begin(), row.end()), var(r)};
}

void write_bank_tsv(std::ostream& out, const PosteriorBank& bank,
                    const std::vector<std::string>* keys) {
  if (keys) require_same_dim(keys->size(), bank.size(), "bank keys");
  for (std::size_t r = 0; r < bank.size(); ++r) {
    if (keys) {
      out << (*keys)[r];
    } else {
      out << r;
    }
    out << '\t' << format_real(bank.var(r));
    for (const double v : bank.mu.row(r)) out << '\t' << format_real(v);
    out << '\n';
  }
}

std::unordered_map<WordId, double> freq_prior_variance(std::span<const std::int64_t> freqs) {
  double total = 0.0;
  for (const auto f : freqs) total += static_cast<double>(f);
  if (!(total > 0.0)) throw std::invalid_argument("prior variance needs a non-empty frequency table");
  std::unordered_map<WordId, double> vars;
  for (std::size_t w = 0; w < freqs.size(); ++w) {
    if (freqs[w] > 0) vars.emplace(static_cast<WordId>(w), total / static_cast<double>(freqs[w]));
  }
  return vars;
}

std::unordered_map<WordId, double> freq_prior_variance(const Vocabulary& vocab) {
  return freq_prior_variance(vocab.freqs());
}

SentenceBag make_bag(std::span<const WordId> sentence) {
  std::map<WordId, double> counts;
  for (const WordId w : sentence) counts[w] += 1.0;
  SentenceBag bag;
  bag.length = sentence.size();
  for (const auto& [w, c] : counts) {
    bag.words.push_back(w);
    bag.counts.push_back(c);
  }
  return bag;
}

void relax_mean(std::span<double> mu, std::span<const double> prior_mean, double mean_rate,
                double tau) {
  const double keep = std::exp(-mean_rate * tau);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = prior_mean[i] + (mu[i] - prior_mean[i]) * keep;
  }
}

double relax_log_var(double log_var, double log_prior_var, double log_var_rate, double tau) {
  // With u = exp(-(log_var - log_prior_var)), du/dt = rate (1 - u).
  const double u0 = std::exp(log_prior_var - log_var);
  const double u = 1.0 + (u0 - 1.0) * std::exp(-log_var_rate * tau);
  return log_prior_var - std::log(u);
}

namespace {

// Adds weight * ℓ_neg(h, hyp[target]; negatives) to the return value and its
// h-gradient to g_h. When `hyp_coef` is given, appends d/d(hyp row) = coef * h.
double accumulate_neg_loss(std::span<const double> h, WordId target,
                           std::span<const WordId> negatives, const EmbeddingMatrix& hyp,
                           double weight, std::span<double> g_h,
                           std::vector<std::pair<WordId, double>>* hyp_coef = nullptr) {
  const double f = dot(h, hyp.row(target));
  double value = -log_sigmoid(f);
  const double gp = -(1.0 - sigmoid(f)) * weight;
  axpy(gp, hyp.row(target), g_h);
  if (hyp_coef) hyp_coef->emplace_back(target, gp);
  for (const WordId n : negatives) {
    const double fn = dot(h, hyp.row(n));
    value -= log_sigmoid(-fn);
    const double gn = sigmoid(fn) * weight;
    axpy(gn, hyp.row(n), g_h);
    if (hyp_coef) hyp_coef->emplace_back(n, gn);
  }
  return weight * value;
}

void check_negatives(const NegativeDraws& negatives, std::size_t tokens, std::size_t vocab) {
  require_same_dim(negatives.size(), tokens, "negative draws per token");
  for (const auto& row : negatives) {
    for (const WordId n : row) {
      if (n >= vocab) throw std::out_of_range("negative word id outside vocabulary");
    }
  }
}

std::vector<double> prior_mean_of(std::span<const WordId> sentence, const EmbeddingMatrix& priors) {
  std::vector<double> mean(priors.dim(), 0.0);
  for (const WordId w : sentence) axpy(1.0, priors.row(w), mean);
  for (auto& x : mean) x /= static_cast<double>(sentence.size());
  return mean;
}

NegativeDraws draw_negatives(std::span<const WordId> tokens, const NoiseTable& noise,
                             std::size_t k, Rng& rng) {
  NegativeDraws draws(tokens.size());
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    draws[j].reserve(k);
    for (std::size_t n = 0; n < k; ++n) {
      if (const auto neg = draw_negative(noise, tokens[j], rng)) draws[j].push_back(*neg);
    }
  }
  return draws;
}

}  // namespace

PosteriorGradient pb_neg_objective(const GaussianPosterior& q, std::span<const WordId> sentence,
                                   const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                                   Lambda lambda, double sigma2_p, RoleAssignment role,
                                   std::span<const double> eps, const NegativeDraws& negatives) {
  check_sentence(sentence, inputs, outputs);
  require_same_dim(q.dim(), inputs.dim(), "posterior mean");
  require_same_dim(eps.size(), q.dim(), "noise draw");
  check_negatives(negatives, sentence.size(), inputs.vocab_size());
  if (!(q.var > 0.0) || !(sigma2_p > 0.0)) throw std::invalid_argument("variances must be > 0");
  const RoleView view = resolve_roles(inputs, outputs, role);
  const std::size_t d = q.dim();
  const double n = static_cast<double>(sentence.size());
  const double sd = std::sqrt(q.var);

  std::vector<double> h(q.mu);
  axpy(sd, eps, h);
  PosteriorGradient out;
  out.grad_mu.assign(d, 0.0);
  for (std::size_t j = 0; j < sentence.size(); ++j) {
    out.value += accumulate_neg_loss(h, sentence[j], negatives[j], view.targets, 1.0 / n,
                                     out.grad_mu);
  }
  out.grad_log_var = 0.5 * sd * dot(out.grad_mu, eps);

  if (!lambda.is_infinite()) {
    const double lam = lambda.value();
    const double dd = static_cast<double>(d);
    const auto prior_mean = prior_mean_of(sentence, view.priors);
    out.value += n / (2.0 * sigma2_p * lam) * squared_distance(q.mu, prior_mean) +
                 n * dd / (2.0 * lam) * (std::log(sigma2_p / q.var) + q.var / sigma2_p);
    for (std::size_t i = 0; i < d; ++i) {
      out.grad_mu[i] += n / (sigma2_p * lam) * (q.mu[i] - prior_mean[i]);
    }
    out.grad_log_var += n * dd / (2.0 * lam) * (q.var / sigma2_p - 1.0);
  }
  return out;
}

BankGradient w_pb_neg_objective(const PosteriorBank& bank, const WordPrior& prior,
                                std::span<const WordId> sentence, WordId target,
                                const EmbeddingMatrix& hypothesis, Lambda lambda,
                                const Matrix& eps, std::span<const WordId> negatives) {
  if (sentence.empty()) throw std::invalid_argument("no in-vocabulary tokens");
  if (!prior.means) throw std::invalid_argument("word prior has no means");
  require_same_dim(bank.size(), prior.vars.size(), "bank rows vs prior variances");
  require_same_dim(bank.dim(), hypothesis.dim(), "bank vs hypothesis vectors");
  const SentenceBag bag = make_bag(sentence);
  require_same_dim(eps.rows(), bag.words.size(), "noise rows per distinct word");
  require_same_dim(eps.cols(), bank.dim(), "noise draw");
  const std::size_t d = bank.dim();
  const double len = static_cast<double>(bag.length);

  std::vector<double> h_bar(d, 0.0);
  for (std::size_t b = 0; b < bag.words.size(); ++b) {
    const WordId v = bag.words[b];
    const double sd = std::sqrt(bank.var(v));
    for (std::size_t i = 0; i < d; ++i) {
      h_bar[i] += bag.counts[b] * (bank.mu(v, i) + sd * eps(b, i)) / len;
    }
  }

  BankGradient out;
  std::vector<double> g_h(d, 0.0);
  out.value = accumulate_neg_loss(h_bar, target, negatives, hypothesis, 1.0, g_h);

  const double inv_lam = lambda.inverse();
  const double dd = static_cast<double>(d);
  for (std::size_t v = 0; v < bank.size(); ++v) {
    const double pv = prior.vars[v];
    const double qv = bank.var(v);
    out.value += 0.5 * inv_lam *
                 (squared_distance(bank.mu.row(v), prior.means->row(v)) / pv +
                  dd * (std::log(pv / qv) + qv / pv));
  }

  out.words = bag.words;
  out.grad_mu = Matrix(bag.words.size(), d);
  out.grad_log_var.assign(bag.words.size(), 0.0);
  for (std::size_t b = 0; b < bag.words.size(); ++b) {
    const WordId v = bag.words[b];
    const double share = bag.counts[b] / len;
    const double sd = std::sqrt(bank.var(v));
    auto gm = out.grad_mu.row(b);
    axpy(share, g_h, gm);
    out.grad_log_var[b] = share * 0.5 * sd * dot(g_h, eps.row(b));
    const auto reg = w_pb_neg_regularizer_grad(bank, prior, v, lambda);
    axpy(1.0, reg.grad_mu, gm);
    out.grad_log_var[b] += reg.grad_log_var;
  }
  return out;
}

RegularizerGradient w_pb_neg_regularizer_grad(const PosteriorBank& bank, const WordPrior& prior,
                                              WordId word, Lambda lambda) {
  const double inv_lam = lambda.inverse();
  const double pv = prior.vars.at(word);
  RegularizerGradient g;
  g.grad_mu.resize(bank.dim());
  const auto mu = bank.mu.row(word);
  const auto mean = prior.means->row(word);
  for (std::size_t i = 0; i < g.grad_mu.size(); ++i) g.grad_mu[i] = inv_lam * (mu[i] - mean[i]) / pv;
  g.grad_log_var = 0.5 * inv_lam * static_cast<double>(bank.dim()) * (bank.var(word) / pv - 1.0);
  return g;
}

namespace {

struct SentenceFitState {
  std::span<double> mu;
  double& log_var;
};

// One PB-neg step for a sentence: regularizer flow over eta, then a
// stochastic gradient step on the negative-sampling term. Returns the sampled
// objective value at the pre-step parameters.
double pb_neg_step(SentenceFitState state, std::span<const WordId> sentence,
                   const RoleView& view, std::span<const double> prior_mean,
                   const NoiseTable& noise, const NegTrainConfig& cfg, double eta, Rng& rng,
                   EmbeddingMatrix* trainable) {
  const std::size_t d = state.mu.size();
  const double n = static_cast<double>(sentence.size());
  const Lambda lambda{cfg.lambda};
  const double log_prior_var = std::log(cfg.sigma2_p);

  if (!lambda.is_infinite() && eta > 0.0) {
    relax_mean(state.mu, prior_mean, n / (cfg.sigma2_p * lambda.value()), eta);
    if (!cfg.collapse_variance) {
      state.log_var = relax_log_var(state.log_var, log_prior_var,
                                    n * static_cast<double>(d) / (2.0 * lambda.value()), eta);
    }
  }

  const NegativeDraws negs = draw_negatives(sentence, noise, cfg.negatives, rng);
  const std::size_t draws = cfg.collapse_variance ? 1 : cfg.mc_samples;
  const double sd = cfg.collapse_variance ? 0.0 : std::exp(0.5 * state.log_var);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> g_mu(d, 0.0), g_h(d, 0.0), eps(d, 0.0), h(d);
  std::vector<std::pair<WordId, double>> hyp_coef;
  std::vector<std::pair<std::vector<double>, std::vector<std::pair<WordId, double>>>> hyp_updates;
  double g_log_var = 0.0;
  double value = 0.0;
  for (std::size_t m = 0; m < draws; ++m) {
    if (!cfg.collapse_variance) {
      for (auto& e : eps) e = normal(rng);
    }
    for (std::size_t i = 0; i < d; ++i) h[i] = state.mu[i] + sd * eps[i];
    std::fill(g_h.begin(), g_h.end(), 0.0);
    hyp_coef.clear();
    for (std::size_t j = 0; j < sentence.size(); ++j) {
      value += accumulate_neg_loss(h, sentence[j], negs[j], view.targets, 1.0 / n, g_h,
                                   trainable ? &hyp_coef : nullptr) /
               static_cast<double>(draws);
    }
    axpy(1.0 / static_cast<double>(draws), g_h, g_mu);
    g_log_var += 0.5 * sd * dot(g_h, eps) / static_cast<double>(draws);
    if (trainable) hyp_updates.emplace_back(h, hyp_coef);
  }

  if (!lambda.is_infinite()) {
    const double var = std::exp(state.log_var);
    value += n / (2.0 * cfg.sigma2_p * lambda.value()) * squared_distance(state.mu, prior_mean) +
             n * static_cast<double>(d) / (2.0 * lambda.value()) *
                 (std::log(cfg.sigma2_p / var) + var / cfg.sigma2_p);
  }

  axpy(-eta, g_mu, state.mu);
  if (!cfg.collapse_variance) state.log_var -= eta * g_log_var;
  if (trainable) {
    for (const auto& [h_used, coefs] : hyp_updates) {
      for (const auto& [w, c] : coefs) {
        axpy(-eta * c / static_cast<double>(draws), h_used, trainable->values.row(w));
      }
    }
  }
  return value;
}

}  // namespace

PbNegResult train_pb_neg(std::span<const Sentence> sentences, const EmbeddingMatrix& inputs,
                         const EmbeddingMatrix& outputs, const NoiseTable& noise,
                         const NegTrainConfig& cfg) {
  cfg.validate();
  if (sentences.empty()) throw std::invalid_argument("empty sentence dataset");
  for (const auto& s : sentences) check_sentence(s, inputs, outputs);
  require_same_dim(noise.size(), inputs.vocab_size(), "noise table vs vocabulary");
  if (cfg.trainable_hypothesis) {
    const EmbeddingMatrix& expected = cfg.role == RoleAssignment::standard ? inputs : outputs;
    if (cfg.trainable_hypothesis != &expected) {
      throw std::invalid_argument("trainable hypothesis must alias the hypothesis matrix");
    }
  }

  const RoleView view = resolve_roles(inputs, outputs, cfg.role);
  const std::size_t d = inputs.dim();
  const std::size_t N = sentences.size();
  PbNegResult result;
  result.bank.mu = Matrix(N, d);
  result.bank.log_var.assign(N, std::log(cfg.sigma2_p));
  result.bank.clock.assign(N, 0.0);
  result.epoch_mean_objective.assign(cfg.epochs, 0.0);

  std::vector<Rng> rngs;
  rngs.reserve(N);
  std::vector<std::vector<double>> prior_means(N);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                              0.5 / static_cast<double>(d));
  for (std::size_t i = 0; i < N; ++i) {
    rngs.emplace_back(derive_seed(cfg.seed, i));
    for (auto& x : result.bank.mu.row(i)) x = init(rngs[i]);
    prior_means[i] = prior_mean_of(sentences[i], view.priors);
  }

  // objective[e][i]; summed in sentence order afterwards so the reduction is
  // independent of the thread layout.
  std::vector<std::vector<double>> objective(cfg.epochs, std::vector<double>(N, 0.0));
  auto fit_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t e = 0; e < cfg.epochs; ++e) {
        objective[e][i] = pb_neg_step({result.bank.mu.row(i), result.bank.log_var[i]},
                                      sentences[i], view, prior_means[i], noise, cfg,
                                      cfg.learning_rate(e), rngs[i], nullptr);
      }
    }
  };

  if (cfg.trainable_hypothesis) {
    // Shared hypothesis rows: epochs outermost, sentences in order.
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      for (std::size_t i = 0; i < N; ++i) {
        objective[e][i] = pb_neg_step({result.bank.mu.row(i), result.bank.log_var[i]},
                                      sentences[i], view, prior_means[i], noise, cfg,
                                      cfg.learning_rate(e), rngs[i], cfg.trainable_hypothesis);
      }
    }
  } else if (cfg.threads == 1 || N == 1) {
    fit_range(0, N);
  } else {
    const std::size_t workers = std::min(cfg.threads, N);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back(fit_range, N * t / workers, N * (t + 1) / workers);
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    double s = 0.0;
    for (const double v : objective[e]) s += v;
    result.epoch_mean_objective[e] = s / static_cast<double>(N);
  }
  return result;
}

namespace {

struct WordTrainer {
  const RoleView& view;
  const NoiseTable& noise;
  const NegTrainConfig& cfg;
  WPbNegResult& res;
  Lambda lambda;
  std::vector<double> log_prior_var;

  void catch_up(WordId v, double now) {
    PosteriorBank& bank = res.bank;
    const double tau = now - bank.clock[v];
    if (tau > 0.0 && !lambda.is_infinite()) {
      relax_mean(bank.mu.row(v), view.priors.row(v), 1.0 / (lambda.value() * res.prior.vars[v]),
                 tau);
      bank.log_var[v] = relax_log_var(bank.log_var[v], log_prior_var[v],
                                      static_cast<double>(bank.dim()) / (2.0 * lambda.value()),
                                      tau);
    }
    bank.clock[v] = now;
  }

  // Returns the mean negative-sampling loss over the sentence's targets.
  double step(std::span<const WordId> sentence, double eta, double now, Rng& rng) {
    PosteriorBank& bank = res.bank;
    const std::size_t d = bank.dim();
    const SentenceBag bag = make_bag(sentence);
    if (cfg.eager_regularizer) {
      for (std::size_t v = 0; v < bank.size(); ++v) catch_up(static_cast<WordId>(v), now);
    } else {
      for (const WordId v : bag.words) catch_up(v, now);
    }

    const NegativeDraws negs = draw_negatives(sentence, noise, cfg.negatives, rng);
    const double len = static_cast<double>(bag.length);
    const double draws = static_cast<double>(cfg.mc_samples);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix eps(bag.words.size(), d);
    Matrix g_mu(bag.words.size(), d);
    std::vector<double> g_log_var(bag.words.size(), 0.0);
    std::vector<double> sd(bag.words.size());
    for (std::size_t b = 0; b < bag.words.size(); ++b) sd[b] = std::exp(0.5 * bank.log_var[bag.words[b]]);

    std::vector<double> h_bar(d), g_h(d);
    double loss = 0.0;
    for (std::size_t m = 0; m < cfg.mc_samples; ++m) {
      for (auto& e : eps.data()) e = normal(rng);
      std::fill(h_bar.begin(), h_bar.end(), 0.0);
      for (std::size_t b = 0; b < bag.words.size(); ++b) {
        const auto mu = bank.mu.row(bag.words[b]);
        const double w = bag.counts[b] / len;
        for (std::size_t i = 0; i < d; ++i) h_bar[i] += w * (mu[i] + sd[b] * eps(b, i));
      }
      std::fill(g_h.begin(), g_h.end(), 0.0);
      for (std::size_t j = 0; j < sentence.size(); ++j) {
        loss += accumulate_neg_loss(h_bar, sentence[j], negs[j], view.targets, 1.0 / len, g_h) /
                draws;
      }
      for (std::size_t b = 0; b < bag.words.size(); ++b) {
        const double share = bag.counts[b] / len / draws;
        axpy(share, g_h, g_mu.row(b));
        g_log_var[b] += share * 0.5 * sd[b] * dot(g_h, eps.row(b));
      }
    }

    for (std::size_t b = 0; b < bag.words.size(); ++b) {
      const WordId v = bag.words[b];
      axpy(-eta, g_mu.row(b), bank.mu.row(v));
      bank.log_var[v] -= eta * g_log_var[b];
    }
    return loss;
  }
};

}  // namespace

WPbNegResult train_w_pb_neg(std::span<const Sentence> sentences, const EmbeddingMatrix& inputs,
                            const EmbeddingMatrix& outputs, const NoiseTable& noise,
                            const NegTrainConfig& cfg) {
  cfg.validate();
  if (sentences.empty()) throw std::invalid_argument("empty sentence dataset");
  for (const auto& s : sentences) check_sentence(s, inputs, outputs);
  require_same_dim(noise.size(), inputs.vocab_size(), "noise table vs vocabulary");

  const RoleView view = resolve_roles(inputs, outputs, cfg.role);
  const std::size_t V = inputs.vocab_size();
  std::vector<std::int64_t> counts(V, 0);
  for (const auto& s : sentences) {
    for (const WordId w : s) ++counts[w];
  }
  const auto prior_vars = freq_prior_variance(counts);
  double total = 0.0;
  for (const auto c : counts) total += static_cast<double>(c);

  WPbNegResult res;
  res.prior.means = &view.priors;
  res.prior.vars.resize(V);
  for (std::size_t w = 0; w < V; ++w) {
    const auto it = prior_vars.find(static_cast<WordId>(w));
    // Words absent from the target sentences get the variance of a singleton.
    res.prior.vars[w] = it != prior_vars.end() ? it->second : total;
  }
  res.bank.mu = view.priors.values;
  res.bank.log_var.resize(V);
  for (std::size_t w = 0; w < V; ++w) res.bank.log_var[w] = std::log(res.prior.vars[w]);
  res.bank.clock.assign(V, 0.0);

  WordTrainer trainer{view, noise, cfg, res, Lambda{cfg.lambda}, res.bank.log_var};
  const std::size_t N = sentences.size();
  const std::size_t workers = std::min(cfg.threads, N);
  double epoch_start = 0.0;  // cumulative learning-rate time at the start of the epoch

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const double eta = cfg.learning_rate(e);
    std::vector<double> losses(N, 0.0);
    if (workers == 1) {
      Rng rng(derive_seed(cfg.seed, e));
      for (std::size_t i = 0; i < N; ++i) {
        const double now = epoch_start + eta * static_cast<double>(i + 1);
        losses[i] = trainer.step(sentences[i], eta, now, rng);
      }
    } else {
      // Hogwild: rows shared between workers are updated without locks.
      std::atomic<std::size_t> steps{0};
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          Rng rng(derive_seed(cfg.seed, 1000003 * (e + 1) + t));
          for (std::size_t i = N * t / workers; i < N * (t + 1) / workers; ++i) {
            const double now = epoch_start + eta * static_cast<double>(steps.fetch_add(1) + 1);
            losses[i] = trainer.step(sentences[i], eta, now, rng);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    epoch_start += eta * static_cast<double>(N);
    double s = 0.0;
    for (const double l : losses) s += l;
    res.epoch_mean_data_loss.push_back(s / static_cast<double>(N));
  }
  for (std::size_t v = 0; v < V; ++v) trainer.catch_up(static_cast<WordId>(v), epoch_start);
  return res;
}

std::vector<double> compose_sentence_vector(const PosteriorBank& bank,
                                            std::span<const WordId> sentence) {
  if (sentence.empty()) throw std::invalid_argument("no in-vocabulary tokens");
  std::vector<double> h(bank.dim(), 0.0);
  for (const WordId w : sentence) {
    if (w >= bank.size()) throw std::out_of_range("word id outside posterior bank");
    axpy(1.0, bank.mu.row(w), h);
  }
  for (auto& x : h) x /= static_cast<double>(sentence.size());
  return h;
}

PosteriorFit pb_neg_fit(const BoundCheckSetup& setup, const NegTrainConfig& cfg) {
  cfg.validate();
  auto hypothesis = std::make_shared<EmbeddingMatrix>(setup.hypothesis);
  auto priors = std::make_shared<EmbeddingMatrix>(setup.prior_vectors);
  auto noise = std::make_shared<NoiseTable>(setup.model.noise);
  NegTrainConfig local = cfg;
  local.sigma2_p = setup.sigma2_p;
  local.role = RoleAssignment::standard;
  local.trainable_hypothesis = nullptr;
  local.threads = 1;
  return [hypothesis, priors, noise, local](const GenerativeSample& sample, const PoEPrior&,
                                            Rng& rng) {
    NegTrainConfig run = local;
    run.seed = rng();
    const std::vector<Sentence> one{sample.sentence};
    const PbNegResult fit = train_pb_neg(one, *hypothesis, *priors, *noise, run);
    return fit.bank.posterior(0);
  };
}

}  // namespace pbsv
