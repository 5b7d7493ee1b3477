#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbsv/eval.hpp"
#include "pbsv/neg_trainer.hpp"
#include "pbsv/skipgram.hpp"

namespace pbsv::cli {

/// Parses a λ flag: a positive real or the literal `inf`.
double parse_lambda(const std::string& text);

struct TrainWordsOptions {
  std::string corpus;
  std::string out_prefix;
  SkipgramConfig skipgram;
};

struct EmbedOptions {
  std::string in_vectors;
  std::string out_vectors;
  std::string sentences;
  std::string fit_sentences;  // empty: fit on `sentences`
  std::string out;
  std::string bank_out;  // optional posterior dump (pb-neg, w-pb-neg)
  std::string method = "average";
  std::string lambda = "1";
  double sigma2_p = 1.0;
  bool switch_roles = false;
  bool emit_var = false;
  bool skip_empty = false;
  NegTrainConfig neg;  // lambda/sigma2_p/role are filled from the fields above
};

struct EvalOptions {
  std::vector<std::string> train_vectors;  // one per λ variant
  std::vector<std::string> test_vectors;
  std::vector<std::string> lambdas;        // empty, or parallel to the vector files
  std::string train_labels;
  std::string test_labels;
  std::string out;
  std::string method = "unnamed";
  std::string normalize = "grid-both";
  bool drop_var = false;
  EvalConfig eval;
};

struct BoundCheckOptions {
  std::string out;
  std::size_t vocab_size = 20;
  std::size_t dim = 5;
  double gamma = 0.5;
  std::optional<double> pi;  // default 1/(1+k)
  std::size_t k = 1;
  double sigma2_p = 1.0;
  std::size_t sentence_len = 10;
  std::size_t trials = 200;
  double delta = 0.05;
  std::optional<double> lambda;  // default: n = sentence_len (1 + k)
  std::string fit = "fixed-prior";
  NegTrainConfig neg;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// Each command writes its artifact atomically and throws on failure.
void train_words(const TrainWordsOptions& opt);
void embed(const EmbedOptions& opt);
void eval(const EvalOptions& opt);
void bound_check(const BoundCheckOptions& opt);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace pbsv::cli
