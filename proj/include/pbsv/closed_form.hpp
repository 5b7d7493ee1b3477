#pragma once

#include <limits>
#include <span>
#include <vector>

#include "pbsv/corpus.hpp"
#include "pbsv/matrix.hpp"

namespace pbsv {

/// N(mu, var * I). var is the isotropic variance, always > 0.
struct GaussianPosterior {
  std::vector<double> mu;
  double var = 1.0;

  std::size_t dim() const { return mu.size(); }
};

/// `switched` is the `i-` family: output vectors become the targets/hypothesis
/// and input vectors the prior means.
enum class RoleAssignment { standard, switched };

/// Trade-off parameter of the Catoni bound. Infinity is a legal value and
/// turns the prior penalty off.
class Lambda {
 public:
  explicit Lambda(double value);
  static Lambda infinite() { return Lambda(std::numeric_limits<double>::infinity()); }

  double value() const { return value_; }
  bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
  /// 1/λ, exactly 0 for λ = ∞.
  double inverse() const { return is_infinite() ? 0.0 : 1.0 / value_; }

 private:
  double value_;
};

/// Word vectors seen through a role assignment: `targets` are what the
/// posterior regresses onto (î under the standard role), `priors` are the
/// prior means (ô under the standard role).
struct RoleView {
  const EmbeddingMatrix& targets;
  const EmbeddingMatrix& priors;
};

RoleView resolve_roles(const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                       RoleAssignment role);

/// Throws std::invalid_argument("no in-vocabulary tokens") for an empty sentence
/// and on any id outside either matrix.
void check_sentence(std::span<const WordId> sentence, const EmbeddingMatrix& inputs,
                    const EmbeddingMatrix& outputs);

/// Squared-L2 posterior. With α = |S| / (σ²_P λ):
///   mu  = Σ_w (î_w + α ô_w) / ((1 + α) |S|)
///   var = σ²_P
GaussianPosterior pb_l2_posterior(std::span<const WordId> sentence,
                                  const EmbeddingMatrix& inputs,
                                  const EmbeddingMatrix& outputs, Lambda lambda,
                                  double sigma2_p, RoleAssignment role = RoleAssignment::standard);

/// (1/|S|) Σ_w (î_w + ô_w) / 2. Same arithmetic as pb_l2_posterior at α = 1.
std::vector<double> average_both(std::span<const WordId> sentence, const EmbeddingMatrix& inputs,
                                 const EmbeddingMatrix& outputs);

/// IDF-weighted posterior with σ²_{P_w} = 1 / IDF(w):
///   mu  = Σ_w IDF(w) (î_w + ô_w / λ) / ((1 + 1/λ) Σ_w IDF(w))
///   var = |S| / Σ_w IDF(w)
GaussianPosterior pb_idf_l2_posterior(std::span<const WordId> sentence,
                                      const EmbeddingMatrix& inputs,
                                      const EmbeddingMatrix& outputs, double inv_lambda,
                                      const IdfTable& idf,
                                      RoleAssignment role = RoleAssignment::standard);

/// Reparameterized squared-L2 objective at a single draw h = mu + sqrt(var) eps,
/// without the q-independent constant:
///   (1/|S|) Σ_w ½||t_w - h||² + |S|/(2σ²_P λ) ||mu - mean(p)||²
///     + |S| d/(2λ) (ln(σ²_P/var) + var/σ²_P)
double pb_l2_objective_sample(const GaussianPosterior& q, std::span<const WordId> sentence,
                              const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                              Lambda lambda, double sigma2_p, std::span<const double> eps,
                              RoleAssignment role = RoleAssignment::standard);

/// Expectation of pb_l2_objective_sample over eps ~ N(0, I). The data term
/// contributes d·var/2 on top of its value at h = mu.
double pb_l2_objective_expected(const GaussianPosterior& q, std::span<const WordId> sentence,
                                const EmbeddingMatrix& inputs, const EmbeddingMatrix& outputs,
                                Lambda lambda, double sigma2_p,
                                RoleAssignment role = RoleAssignment::standard);

}  // namespace pbsv
