#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbsv/matrix.hpp"

namespace pbsv {

enum class Normalization { none, l2, grid_both };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

struct EvalConfig {
  std::vector<double> c_grid{0.0625, 0.25, 1.0, 4.0, 16.0};
  std::size_t folds = 5;
  Normalization normalize = Normalization::grid_both;
  std::size_t repeats = 3;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::size_t max_iter = 1000;
  std::size_t threads = 1;

  void validate() const;
};

/// Rows scaled to unit norm; zero rows stay zero.
Matrix l2_normalize(const Matrix& vectors);

struct BinaryLogReg {
  std::vector<double> w;
  double b = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // value after every accepted step, starting at w = 0
};

struct OvrClassifier {
  std::vector<int> classes;  // ascending
  std::vector<BinaryLogReg> models;

  std::vector<double> scores(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& features) const;
};

/// Minimizes (1/C)(1/2)||w||² + Σ log(1 + exp(-y (w·x + b))) for y = ±1.
BinaryLogReg fit_logreg_binary(const Matrix& features, std::span<const int> signs, double c,
                               double tol, std::size_t max_iter);

/// One binary problem per class; requires at least two classes.
OvrClassifier fit_logreg_ovr(const Matrix& features, std::span<const int> labels, double c,
                             const EvalConfig& cfg);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Fold id per sample: each class is shuffled and dealt round-robin, so fold
/// sizes within a class differ by at most one.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed);

/// Features computed with one λ setting (or the only setting, when the method
/// has no λ).
struct FeatureVariant {
  std::optional<double> lambda;
  Matrix train;
  Matrix test;
};

struct CvEntry {
  std::optional<double> lambda;
  Normalization normalization = Normalization::none;
  double c = 1.0;
  double mean_accuracy = 0.0;  // averaged over folds and repeats
};

struct EvalReport {
  std::string method;
  double chosen_c = 0.0;
  Normalization chosen_normalization = Normalization::none;
  std::optional<double> chosen_lambda;
  double test_accuracy_mean = 0.0;
  double test_accuracy_std = 0.0;  // population std over repeats
  std::vector<double> test_accuracies;
  std::vector<CvEntry> cv_table;
};

/// Cross-validated selection of (C, normalization, λ variant), then a refit on
/// the whole training set. Repeat r draws its folds from derive_seed(seed, r).
/// The reported choice is that of the first repeat.
EvalReport grid_search_eval(std::span<const FeatureVariant> variants,
                            std::span<const int> train_labels, std::span<const int> test_labels,
                            const EvalConfig& cfg);

/// Convenience overload for a single feature set.
EvalReport grid_search_eval(const Matrix& train, std::span<const int> train_labels,
                            const Matrix& test, std::span<const int> test_labels,
                            const EvalConfig& cfg);

/// Accuracy of always predicting the most frequent training class (ties: smallest id).
double majority_baseline(std::span<const int> train_labels, std::span<const int> test_labels);

}  // namespace pbsv
