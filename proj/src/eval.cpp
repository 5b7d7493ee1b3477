#include "pbsv/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "pbsv/random.hpp"

namespace pbsv {

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::l2: return "l2";
    case Normalization::grid_both: return "grid-both";
  }
  return "none";
}

Normalization parse_normalization(const std::string& s) {
  if (s == "none") return Normalization::none;
  if (s == "l2") return Normalization::l2;
  if (s == "grid-both") return Normalization::grid_both;
  throw std::invalid_argument("unknown normalization '" + s + "'");
}

void EvalConfig::validate() const {
  if (c_grid.empty()) throw std::invalid_argument("C grid must not be empty");
  for (const double c : c_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("C values must be positive");
  }
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Matrix l2_normalize(const Matrix& vectors) {
  Matrix out = vectors;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = std::sqrt(squared_norm(row));
    if (norm > 0.0) {
      for (auto& x : row) x /= norm;
    }
  }
  return out;
}

namespace {

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

// Margins z_i = w·x_i + b are kept alongside the iterate. Along a search
// direction z moves linearly, so each line-search trial costs O(n).
double objective(std::span<const double> z, std::span<const int> y, double w_norm2,
                 double inv_c) {
  double v = 0.5 * inv_c * w_norm2;
  for (std::size_t i = 0; i < z.size(); ++i) v += softplus_neg(y[i] * z[i]);
  return v;
}

}  // namespace

BinaryLogReg fit_logreg_binary(const Matrix& features, std::span<const int> signs, double c,
                               double tol, std::size_t max_iter) {
  require_same_dim(features.rows(), signs.size(), "features vs labels");
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  const double inv_c = 1.0 / c;

  // Step size starts at the inverse of a Lipschitz bound and adapts.
  double frob = 0.0;
  for (const double v : features.data()) frob += v * v;
  double step = 1.0 / (inv_c + 0.25 * (frob + static_cast<double>(n)));

  BinaryLogReg m;
  m.w.assign(d, 0.0);
  std::vector<double> gw(d), z(n, 0.0), dz(n), z_new(n);
  double f = objective(z, signs, 0.0, inv_c);
  m.objective_trace.push_back(f);
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t j = 0; j < d; ++j) gw[j] = inv_c * m.w[j];
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double coef = -signs[i] * sigmoid(-signs[i] * z[i]);
      axpy(coef, features.row(i), gw);
      gb += coef;
    }
    const double gnorm2 = squared_norm(gw) + gb * gb;
    if (std::sqrt(gnorm2) < tol) break;
    for (std::size_t i = 0; i < n; ++i) dz[i] = dot(gw, features.row(i)) + gb;
    const double w2 = squared_norm(m.w), wg = dot(m.w, gw), g2 = squared_norm(gw);

    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < n; ++i) z_new[i] = z[i] - step * dz[i];
      const double f_new =
          objective(z_new, signs, w2 - 2.0 * step * wg + step * step * g2, inv_c);
      if (f_new <= f - 0.5 * step * gnorm2) {
        axpy(-step, gw, m.w);
        m.b -= step * gb;
        f = f_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent left
    // Recompute margins exactly so rounding does not accumulate.
    for (std::size_t i = 0; i < n; ++i) z[i] = dot(m.w, features.row(i)) + m.b;
    m.objective_trace.push_back(f);
    ++m.iterations;
    step *= 2.0;
  }
  return m;
}

std::vector<double> OvrClassifier::scores(std::span<const double> x) const {
  std::vector<double> s(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) s[k] = dot(models[k].w, x) + models[k].b;
  return s;
}

int OvrClassifier::predict(std::span<const double> x) const {
  const auto s = scores(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k] > s[best]) best = k;
  }
  return classes[best];
}

std::vector<int> OvrClassifier::predict(const Matrix& features) const {
  std::vector<int> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict(features.row(r));
  return out;
}

OvrClassifier fit_logreg_ovr(const Matrix& features, std::span<const int> labels, double c,
                             const EvalConfig& cfg) {
  require_same_dim(features.rows(), labels.size(), "features vs labels");
  for (const double v : features.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature rows must be finite");
  }
  OvrClassifier clf;
  clf.classes.assign(labels.begin(), labels.end());
  std::sort(clf.classes.begin(), clf.classes.end());
  clf.classes.erase(std::unique(clf.classes.begin(), clf.classes.end()), clf.classes.end());
  if (clf.classes.size() < 2) throw std::invalid_argument("need at least two classes");
  std::vector<int> signs(labels.size());
  if (clf.classes.size() == 2) {
    // The two one-vs-rest problems are mirror images: fit one, negate it.
    for (std::size_t i = 0; i < labels.size(); ++i) signs[i] = labels[i] == clf.classes[1] ? 1 : -1;
    BinaryLogReg pos = fit_logreg_binary(features, signs, c, cfg.tol, cfg.max_iter);
    BinaryLogReg neg = pos;
    for (auto& w : neg.w) w = -w;
    neg.b = -neg.b;
    clf.models = {std::move(neg), std::move(pos)};
    return clf;
  }
  for (const int k : clf.classes) {
    for (std::size_t i = 0; i < labels.size(); ++i) signs[i] = labels[i] == k ? 1 : -1;
    clf.models.push_back(fit_logreg_binary(features, signs, c, cfg.tol, cfg.max_iter));
  }
  return clf;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  require_same_dim(predicted.size(), truth.size(), "predictions vs labels");
  if (truth.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [k, idx] : by_class) {
    if (idx.size() < folds) {
      throw std::invalid_argument("class " + std::to_string(k) + " has " +
                                  std::to_string(idx.size()) + " members, fewer than " +
                                  std::to_string(folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(labels.size());
  std::size_t next = 0;  // carried across classes to balance total fold sizes
  for (auto& [k, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (const std::size_t i : idx) fold[i] = next++ % folds;
  }
  return fold;
}

namespace {

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(m.row(rows[r]).begin(), m.row(rows[r]).end(), out.row(r).begin());
  }
  return out;
}

std::vector<Normalization> normalization_options(Normalization n) {
  if (n == Normalization::grid_both) return {Normalization::none, Normalization::l2};
  return {n};
}

// Runs jobs [0, n) on up to `threads` workers; each job writes its own slot.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& job) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

bool lambda_less(const std::optional<double>& a, const std::optional<double>& b) {
  if (!a || !b) return false;
  return *a < *b;
}

}  // namespace

EvalReport grid_search_eval(std::span<const FeatureVariant> variants,
                            std::span<const int> train_labels, std::span<const int> test_labels,
                            const EvalConfig& cfg) {
  cfg.validate();
  if (variants.empty()) throw std::invalid_argument("no feature variants");
  for (const auto& v : variants) {
    require_same_dim(v.train.rows(), train_labels.size(), "train features vs labels");
    require_same_dim(v.test.rows(), test_labels.size(), "test features vs labels");
    require_same_dim(v.train.cols(), v.test.cols(), "train vs test features");
  }

  // Candidate order encodes the tie-break: smaller C, then none before l2,
  // then smaller λ. The first maximum wins.
  struct Candidate {
    std::size_t variant;
    Normalization norm;
    double c;
  };
  std::vector<std::size_t> variant_order(variants.size());
  for (std::size_t i = 0; i < variants.size(); ++i) variant_order[i] = i;
  std::stable_sort(variant_order.begin(), variant_order.end(), [&](std::size_t a, std::size_t b) {
    return lambda_less(variants[a].lambda, variants[b].lambda);
  });
  std::vector<double> c_sorted = cfg.c_grid;
  std::stable_sort(c_sorted.begin(), c_sorted.end());
  std::vector<Candidate> candidates;
  for (const double c : c_sorted) {
    for (const Normalization n : normalization_options(cfg.normalize)) {
      for (const std::size_t v : variant_order) candidates.push_back({v, n, c});
    }
  }

  // Pre-normalized copies so every job reads shared, immutable features.
  std::vector<Matrix> train_l2(variants.size()), test_l2(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    train_l2[v] = l2_normalize(variants[v].train);
    test_l2[v] = l2_normalize(variants[v].test);
  }
  auto train_of = [&](const Candidate& cand) -> const Matrix& {
    return cand.norm == Normalization::l2 ? train_l2[cand.variant] : variants[cand.variant].train;
  };
  auto test_of = [&](const Candidate& cand) -> const Matrix& {
    return cand.norm == Normalization::l2 ? test_l2[cand.variant] : variants[cand.variant].test;
  };

  const std::size_t K = cfg.folds;
  std::vector<double> cv_sum(candidates.size(), 0.0);
  EvalReport report;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const auto fold = stratified_folds(train_labels, K, derive_seed(cfg.seed, r));
    std::vector<std::vector<std::size_t>> fit_idx(K), held_idx(K);
    for (std::size_t i = 0; i < fold.size(); ++i) {
      for (std::size_t f = 0; f < K; ++f) (fold[i] == f ? held_idx[f] : fit_idx[f]).push_back(i);
    }
    std::vector<double> fold_acc(candidates.size() * K, 0.0);
    parallel_for(fold_acc.size(), cfg.threads, [&](std::size_t job) {
      const Candidate& cand = candidates[job / K];
      const std::size_t f = job % K;
      const Matrix& x = train_of(cand);
      std::vector<int> y_fit, y_held;
      for (const auto i : fit_idx[f]) y_fit.push_back(train_labels[i]);
      for (const auto i : held_idx[f]) y_held.push_back(train_labels[i]);
      const auto clf = fit_logreg_ovr(take_rows(x, fit_idx[f]), y_fit, cand.c, cfg);
      fold_acc[job] = accuracy(clf.predict(take_rows(x, held_idx[f])), y_held);
    });

    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      double s = 0.0;
      for (std::size_t f = 0; f < K; ++f) s += fold_acc[ci * K + f];
      s /= static_cast<double>(K);
      cv_sum[ci] += s;
      if (s > best_score) {
        best_score = s;
        best = ci;
      }
    }
    const Candidate& chosen = candidates[best];
    const auto clf = fit_logreg_ovr(train_of(chosen), train_labels, chosen.c, cfg);
    report.test_accuracies.push_back(accuracy(clf.predict(test_of(chosen)), test_labels));
    if (r == 0) {
      report.chosen_c = chosen.c;
      report.chosen_normalization = chosen.norm;
      report.chosen_lambda = variants[chosen.variant].lambda;
    }
  }

  double mean = 0.0;
  for (const double a : report.test_accuracies) mean += a;
  mean /= static_cast<double>(report.test_accuracies.size());
  double var = 0.0;
  for (const double a : report.test_accuracies) var += (a - mean) * (a - mean);
  report.test_accuracy_mean = mean;
  report.test_accuracy_std = std::sqrt(var / static_cast<double>(report.test_accuracies.size()));
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    report.cv_table.push_back({variants[candidates[ci].variant].lambda, candidates[ci].norm,
                               candidates[ci].c, cv_sum[ci] / static_cast<double>(cfg.repeats)});
  }
  return report;
}

EvalReport grid_search_eval(const Matrix& train, std::span<const int> train_labels,
                            const Matrix& test, std::span<const int> test_labels,
                            const EvalConfig& cfg) {
  const FeatureVariant only{std::nullopt, train, test};
  return grid_search_eval(std::span<const FeatureVariant>(&only, 1), train_labels, test_labels,
                          cfg);
}

double majority_baseline(std::span<const int> train_labels, std::span<const int> test_labels) {
  if (train_labels.empty()) throw std::invalid_argument("empty training labels");
  std::map<int, std::size_t> counts;
  for (const int y : train_labels) ++counts[y];
  int best = counts.begin()->first;
  for (const auto& [k, n] : counts) {
    if (n > counts[best]) best = k;
  }
  const std::vector<int> pred(test_labels.size(), best);
  return accuracy(pred, test_labels);
}

}  // namespace pbsv
