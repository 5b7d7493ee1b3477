#include "pbsv/closed_form.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pbsv {

Lambda::Lambda(double value) : value_(value) {
  if (!(value > 0.0)) throw std::invalid_argument("lambda must be > 0");
}

RoleView resolve_roles(const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                       RoleAssignment role) {
  if (role == RoleAssignment::standard) return {inputs, outputs};
  return {outputs, inputs};
}

void check_sentence(std::span<const WordId> sentence, const EmbeddingMatrix& inputs,
                    const EmbeddingMatrix& outputs) {
  if (sentence.empty()) throw std::invalid_argument("no in-vocabulary tokens");
  require_same_dim(inputs.dim(), outputs.dim(), "input vs output vectors");
  require_same_dim(inputs.vocab_size(), outputs.vocab_size(), "input vs output vocabulary");
  for (const WordId w : sentence) {
    if (w >= inputs.vocab_size()) {
      throw std::out_of_range("word id " + std::to_string(w) + " outside vocabulary");
    }
  }
}

namespace {

struct RoleSums {
  std::vector<double> targets;
  std::vector<double> priors;
};

RoleSums token_sums(std::span<const WordId> sentence, const RoleView& view) {
  const std::size_t d = view.targets.dim();
  RoleSums s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const WordId w : sentence) {
    axpy(1.0, view.targets.row(w), s.targets);
    axpy(1.0, view.priors.row(w), s.priors);
  }
  return s;
}

std::vector<double> mix_means(const RoleSums& sums, double alpha, double count) {
  std::vector<double> mu(sums.targets.size());
  const double denom = (1.0 + alpha) * count;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mu[j] = (sums.targets[j] + alpha * sums.priors[j]) / denom;
  }
  return mu;
}

}  // namespace

GaussianPosterior pb_l2_posterior(std::span<const WordId> sentence,
                                  const EmbeddingMatrix& inputs,
                                  const EmbeddingMatrix& outputs, Lambda lambda,
                                  double sigma2_p, RoleAssignment role) {
  check_sentence(sentence, inputs, outputs);
  if (!(sigma2_p > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  const double n = static_cast<double>(sentence.size());
  const double alpha = lambda.is_infinite() ? 0.0 : n / (sigma2_p * lambda.value());
  const auto sums = token_sums(sentence, resolve_roles(inputs, outputs, role));
  return {mix_means(sums, alpha, n), sigma2_p};
}

std::vector<double> average_both(std::span<const WordId> sentence, const EmbeddingMatrix& inputs,
                                 const EmbeddingMatrix& outputs) {
  check_sentence(sentence, inputs, outputs);
  const auto sums = token_sums(sentence, resolve_roles(inputs, outputs, RoleAssignment::standard));
  return mix_means(sums, 1.0, static_cast<double>(sentence.size()));
}

GaussianPosterior pb_idf_l2_posterior(std::span<const WordId> sentence,
                                      const EmbeddingMatrix& inputs,
                                      const EmbeddingMatrix& outputs, double inv_lambda,
                                      const IdfTable& idf, RoleAssignment role) {
  check_sentence(sentence, inputs, outputs);
  if (!(inv_lambda >= 0.0)) throw std::invalid_argument("1/lambda must be >= 0");
  const RoleView view = resolve_roles(inputs, outputs, role);
  const std::size_t d = inputs.dim();
  std::vector<double> num_t(d, 0.0), num_p(d, 0.0);
  double weight = 0.0;
  for (const WordId w : sentence) {
    const double g = idf.at(w);
    axpy(g, view.targets.row(w), num_t);
    axpy(g, view.priors.row(w), num_p);
    weight += g;
  }
  GaussianPosterior q;
  q.mu.resize(d);
  const double denom = (1.0 + inv_lambda) * weight;
  for (std::size_t j = 0; j < d; ++j) q.mu[j] = (num_t[j] + inv_lambda * num_p[j]) / denom;
  q.var = static_cast<double>(sentence.size()) / weight;
  return q;
}

namespace {

double l2_penalty(const GaussianPosterior& q, std::span<const double> prior_mean, double n,
                  Lambda lambda, double sigma2_p) {
  if (lambda.is_infinite()) return 0.0;
  const double d = static_cast<double>(q.dim());
  return n / (2.0 * sigma2_p * lambda.value()) * squared_distance(q.mu, prior_mean) +
         n * d / (2.0 * lambda.value()) * (std::log(sigma2_p / q.var) + q.var / sigma2_p);
}

}  // namespace

double pb_l2_objective_sample(const GaussianPosterior& q, std::span<const WordId> sentence,
                              const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                              Lambda lambda, double sigma2_p, std::span<const double> eps,
                              RoleAssignment role) {
  check_sentence(sentence, inputs, outputs);
  require_same_dim(q.dim(), inputs.dim(), "posterior mean");
  require_same_dim(eps.size(), q.dim(), "noise draw");
  if (!(q.var > 0.0)) throw std::invalid_argument("posterior variance must be > 0");
  const RoleView view = resolve_roles(inputs, outputs, role);
  const double n = static_cast<double>(sentence.size());
  const double sd = std::sqrt(q.var);
  std::vector<double> h(q.mu);
  axpy(sd, eps, h);
  double data = 0.0;
  for (const WordId w : sentence) data += 0.5 * squared_distance(view.targets.row(w), h);
  const auto sums = token_sums(sentence, view);
  std::vector<double> prior_mean(sums.priors);
  for (auto& x : prior_mean) x /= n;
  return data / n + l2_penalty(q, prior_mean, n, lambda, sigma2_p);
}

double pb_l2_objective_expected(const GaussianPosterior& q, std::span<const WordId> sentence,
                                const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                                Lambda lambda, double sigma2_p, RoleAssignment role) {
  const std::vector<double> zero(q.dim(), 0.0);
  const double at_mean =
      pb_l2_objective_sample(q, sentence, inputs, outputs, lambda, sigma2_p, zero, role);
  return at_mean + 0.5 * static_cast<double>(q.dim()) * q.var;
}

}  // namespace pbsv
