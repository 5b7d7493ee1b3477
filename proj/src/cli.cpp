#include "pbsv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pbsv/closed_form.hpp"
#include "pbsv/corpus.hpp"
#include "pbsv/io.hpp"
#include "pbsv/pac_bayes.hpp"

namespace pbsv::cli {

using nlohmann::ordered_json;

double parse_lambda(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("lambda must be a positive number or 'inf', got '" + text + "'");
  }
  return v;
}

namespace {

ordered_json real_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

ordered_json optional_lambda(const std::optional<double>& v) {
  if (!v) return nullptr;
  return real_or_inf(*v);
}

std::vector<std::vector<std::string>> tokenize_lines(const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(normalize_text(l));
  return out;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string role_name(RoleAssignment r) {
  return r == RoleAssignment::standard ? "standard" : "switched";
}

ordered_json neg_config_json(const NegTrainConfig& c) {
  return {{"lambda", real_or_inf(c.lambda)},  {"sigma2_p", c.sigma2_p},
          {"negatives", c.negatives},          {"epochs", c.epochs},
          {"lr0", c.lr0},                      {"mc_samples", c.mc_samples},
          {"power", c.power},                  {"seed", c.seed},
          {"role", role_name(c.role)},         {"threads", c.threads}};
}

}  // namespace

void train_words(const TrainWordsOptions& opt) {
  opt.skipgram.validate();
  const auto lines = read_lines(opt.corpus);
  const auto tokenized = tokenize_lines(lines);
  std::vector<std::string> all;
  for (const auto& t : tokenized) all.insert(all.end(), t.begin(), t.end());
  const Vocabulary vocab = Vocabulary::build(all, opt.skipgram.min_count);

  std::vector<Sentence> corpus;
  for (const auto& t : tokenized) {
    const Sentence s = vocab.encode(t);
    for (auto& chunk : chunk_stream(s)) corpus.push_back(std::move(chunk));
  }
  const SkipgramResult res = train_skipgram(corpus, vocab, opt.skipgram);

  std::ostringstream in_text, out_text;
  write_word2vec(in_text, vocab.words(), res.input);
  write_word2vec(out_text, vocab.words(), res.output);
  write_file_atomically(opt.out_prefix + ".in.vec", in_text.str());
  write_file_atomically(opt.out_prefix + ".out.vec", out_text.str());
}

namespace {

struct LoadedEmbeddings {
  Vocabulary vocab;
  EmbeddingMatrix inputs;
  EmbeddingMatrix outputs;
};

// Output rows are re-ordered to follow the input file's word order.
LoadedEmbeddings load_embeddings(const std::string& in_path, const std::string& out_path) {
  WordVectors in = read_word2vec_file(in_path, EmbeddingRole::input);
  WordVectors out = read_word2vec_file(out_path, EmbeddingRole::output);
  require_same_dim(in.vectors.dim(), out.vectors.dim(), "input vs output vector files");
  LoadedEmbeddings e;
  e.vocab = Vocabulary::from_words(in.words);
  e.inputs = std::move(in.vectors);
  e.outputs.role = EmbeddingRole::output;
  e.outputs.values = Matrix(e.vocab.size(), e.inputs.dim());
  std::vector<bool> seen(e.vocab.size(), false);
  for (std::size_t r = 0; r < out.words.size(); ++r) {
    const auto id = e.vocab.find(out.words[r]);
    if (!id) continue;
    seen[*id] = true;
    std::copy(out.vectors.row(r).begin(), out.vectors.row(r).end(),
              e.outputs.values.row(*id).begin());
  }
  for (std::size_t w = 0; w < seen.size(); ++w) {
    if (!seen[w]) {
      throw std::runtime_error("word '" + e.vocab.word(static_cast<WordId>(w)) +
                               "' missing from output vector file");
    }
  }
  return e;
}

std::vector<Sentence> encode_lines(const std::string& path, const Vocabulary& vocab) {
  std::vector<Sentence> out;
  for (const auto& tokens : tokenize_lines(read_lines(path))) out.push_back(vocab.encode(tokens));
  return out;
}

std::vector<Sentence> non_empty(const std::vector<Sentence>& sentences) {
  std::vector<Sentence> out;
  for (const auto& s : sentences) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

std::vector<std::int64_t> unigram_counts(const std::vector<Sentence>& sentences, std::size_t V) {
  std::vector<std::int64_t> counts(V, 0);
  for (const auto& s : sentences) {
    for (const WordId w : s) ++counts[w];
  }
  return counts;
}

const std::vector<std::string> kMethods{"average", "average-both", "idf-average", "pb-l2",
                                        "pb-idf-l2", "pb-neg",     "w-pb-neg"};

}  // namespace

void embed(const EmbedOptions& opt) {
  if (std::find(kMethods.begin(), kMethods.end(), opt.method) == kMethods.end()) {
    throw std::invalid_argument("unknown method '" + opt.method + "'");
  }
  const double lambda_value = parse_lambda(opt.lambda);
  const Lambda lambda{lambda_value};
  if (!(opt.sigma2_p > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  const RoleAssignment role = opt.switch_roles ? RoleAssignment::switched : RoleAssignment::standard;

  const LoadedEmbeddings emb = load_embeddings(opt.in_vectors, opt.out_vectors);
  const std::vector<Sentence> sentences = encode_lines(opt.sentences, emb.vocab);

  std::vector<std::size_t> empty_lines;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) empty_lines.push_back(i + 1);
  }
  if (!empty_lines.empty() && !opt.skip_empty) {
    std::string list;
    for (std::size_t i = 0; i < empty_lines.size() && i < 20; ++i) {
      list += (i ? ", " : "") + std::to_string(empty_lines[i]);
    }
    if (empty_lines.size() > 20) list += ", ...";
    throw std::runtime_error("no in-vocabulary tokens on line(s) " + list +
                             " (use --skip-empty to emit zero vectors)");
  }

  const std::vector<Sentence> fit_all =
      opt.fit_sentences.empty() ? sentences : encode_lines(opt.fit_sentences, emb.vocab);
  const std::vector<Sentence> fit = non_empty(fit_all);
  if (fit.empty()) throw std::runtime_error("no non-empty sentences to fit on");

  NegTrainConfig neg = opt.neg;
  neg.lambda = lambda_value;
  neg.sigma2_p = opt.sigma2_p;
  neg.role = role;

  const std::size_t d = emb.inputs.dim();
  Matrix out(sentences.size(), d);
  std::vector<double> vars(sentences.size(), opt.sigma2_p);
  std::string bank_text;

  auto store = [&](std::size_t i, const GaussianPosterior& q) {
    std::copy(q.mu.begin(), q.mu.end(), out.row(i).begin());
    vars[i] = q.var;
  };

  if (opt.method == "average" || opt.method == "pb-l2") {
    const Lambda lam = opt.method == "average" ? Lambda::infinite() : lambda;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (!sentences[i].empty()) {
        store(i, pb_l2_posterior(sentences[i], emb.inputs, emb.outputs, lam, opt.sigma2_p, role));
      }
    }
  } else if (opt.method == "average-both") {
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].empty()) continue;
      const auto mu = role == RoleAssignment::standard
                          ? average_both(sentences[i], emb.inputs, emb.outputs)
                          : average_both(sentences[i], emb.outputs, emb.inputs);
      store(i, {mu, opt.sigma2_p});
    }
  } else if (opt.method == "idf-average" || opt.method == "pb-idf-l2") {
    const IdfTable idf = compute_idf(SentenceDataset::from_sentences(fit, emb.vocab.size()));
    const double inv = opt.method == "idf-average" ? 0.0 : lambda.inverse();
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (!sentences[i].empty()) {
        store(i, pb_idf_l2_posterior(sentences[i], emb.inputs, emb.outputs, inv, idf, role));
      }
    }
  } else if (opt.method == "pb-neg") {
    // Per-sentence posteriors: always fitted on the sentences being embedded.
    std::vector<Sentence> active;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (!sentences[i].empty()) {
        active.push_back(sentences[i]);
        rows.push_back(i);
      }
    }
    const auto counts = unigram_counts(active, emb.vocab.size());
    const NoiseTable noise(counts, neg.power);
    const PbNegResult res = train_pb_neg(active, emb.inputs, emb.outputs, noise, neg);
    for (std::size_t r = 0; r < rows.size(); ++r) store(rows[r], res.bank.posterior(r));
    if (!opt.bank_out.empty()) {
      std::vector<std::string> keys;
      for (const auto row : rows) keys.push_back(std::to_string(row));
      std::ostringstream os;
      write_bank_tsv(os, res.bank, &keys);
      bank_text = os.str();
    }
  } else {  // w-pb-neg
    const auto counts = unigram_counts(fit, emb.vocab.size());
    const NoiseTable noise(counts, neg.power);
    const WPbNegResult res = train_w_pb_neg(fit, emb.inputs, emb.outputs, noise, neg);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].empty()) continue;
      const auto h = compose_sentence_vector(res.bank, sentences[i]);
      // Variance of the averaged draw (1/|S|) Σ h_v.
      const SentenceBag bag = make_bag(sentences[i]);
      double v = 0.0;
      for (std::size_t b = 0; b < bag.words.size(); ++b) {
        v += bag.counts[b] * bag.counts[b] * res.bank.var(bag.words[b]);
      }
      const double len = static_cast<double>(bag.length);
      store(i, {h, v / (len * len)});
    }
    if (!opt.bank_out.empty()) {
      std::ostringstream os;
      write_bank_tsv(os, res.bank, &emb.vocab.words());
      bank_text = os.str();
    }
  }

  std::ostringstream os;
  write_vector_tsv(os, out, opt.emit_var ? &vars : nullptr);
  if (!opt.bank_out.empty()) {
    if (bank_text.empty()) throw std::invalid_argument("--bank-out needs pb-neg or w-pb-neg");
    write_file_atomically(opt.bank_out, bank_text);
  }
  write_file_atomically(opt.out, os.str());
  if (!empty_lines.empty()) {
    std::cerr << "warning: " << empty_lines.size()
              << " sentence(s) without in-vocabulary tokens emitted as zero vectors\n";
  }
}

namespace {

Matrix read_tsv_file(const std::string& path, bool drop_var) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_vector_tsv(in, drop_var);
}

std::vector<int> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_labels(in);
}

void require_rows(std::size_t vectors, std::size_t labels, const std::string& what) {
  if (vectors != labels) {
    throw std::runtime_error("row count mismatch: " + what + " vectors have " +
                             std::to_string(vectors) + " rows but labels have " +
                             std::to_string(labels));
  }
}

}  // namespace

void eval(const EvalOptions& opt) {
  EvalConfig cfg = opt.eval;
  cfg.normalize = parse_normalization(opt.normalize);
  cfg.validate();
  if (opt.train_vectors.empty() || opt.train_vectors.size() != opt.test_vectors.size()) {
    throw std::invalid_argument("give the same number of --train-vectors and --test-vectors");
  }
  if (!opt.lambdas.empty() && opt.lambdas.size() != opt.train_vectors.size()) {
    throw std::invalid_argument("--lambdas must list one value per vector file pair");
  }
  if (opt.lambdas.empty() && opt.train_vectors.size() > 1) {
    throw std::invalid_argument("several vector file pairs need --lambdas");
  }
  const auto train_labels = read_labels_file(opt.train_labels);
  const auto test_labels = read_labels_file(opt.test_labels);

  std::vector<FeatureVariant> variants;
  for (std::size_t i = 0; i < opt.train_vectors.size(); ++i) {
    FeatureVariant v;
    if (!opt.lambdas.empty()) v.lambda = parse_lambda(opt.lambdas[i]);
    v.train = read_tsv_file(opt.train_vectors[i], opt.drop_var);
    v.test = read_tsv_file(opt.test_vectors[i], opt.drop_var);
    require_rows(v.train.rows(), train_labels.size(), "train");
    require_rows(v.test.rows(), test_labels.size(), "test");
    variants.push_back(std::move(v));
  }

  EvalReport rep = grid_search_eval(variants, train_labels, test_labels, cfg);
  rep.method = opt.method;

  ordered_json cv = ordered_json::array();
  for (const auto& e : rep.cv_table) {
    cv.push_back({{"lambda", optional_lambda(e.lambda)},
                  {"normalization", to_string(e.normalization)},
                  {"c", e.c},
                  {"mean_cv_accuracy", e.mean_accuracy}});
  }
  ordered_json lambdas = ordered_json::array();
  for (const auto& l : opt.lambdas) lambdas.push_back(l);
  ordered_json report = {
      {"method", rep.method},
      {"chosen_c", rep.chosen_c},
      {"chosen_normalization", to_string(rep.chosen_normalization)},
      {"chosen_lambda", optional_lambda(rep.chosen_lambda)},
      {"test_accuracy_mean", rep.test_accuracy_mean},
      {"test_accuracy_std", rep.test_accuracy_std},
      {"test_accuracies", rep.test_accuracies},
      {"majority_baseline", majority_baseline(train_labels, test_labels)},
      {"cv_table", cv},
      {"config",
       {{"subcommand", "eval"},
        {"train_vectors", opt.train_vectors},
        {"test_vectors", opt.test_vectors},
        {"lambdas", lambdas},
        {"train_labels", opt.train_labels},
        {"test_labels", opt.test_labels},
        {"drop_var", opt.drop_var},
        {"c_grid", cfg.c_grid},
        {"folds", cfg.folds},
        {"normalize", to_string(cfg.normalize)},
        {"repeats", cfg.repeats},
        {"seed", cfg.seed},
        {"tol", cfg.tol},
        {"max_iter", cfg.max_iter},
        {"threads", cfg.threads},
        {"out", opt.out}}}};
  write_file_atomically(opt.out, dump(report));
}

void bound_check(const BoundCheckOptions& opt) {
  if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  if (opt.k < 1) throw std::invalid_argument("k must be >= 1");
  const double pi = opt.pi.value_or(1.0 / (1.0 + static_cast<double>(opt.k)));
  const double n = static_cast<double>(opt.sentence_len * (1 + opt.k));
  const double lambda = opt.lambda.value_or(n);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("bound lambda must be > 0");

  const BoundCheckSetup setup = make_synthetic_setup(opt.vocab_size, opt.dim, opt.gamma, pi, opt.k,
                                                     opt.sigma2_p, opt.sentence_len, opt.seed);
  PosteriorFit fit;
  NegTrainConfig neg = opt.neg;
  if (opt.fit == "fixed-prior") {
    fit = fixed_prior_fit(opt.sigma2_p);
  } else if (opt.fit == "pb-neg") {
    fit = pb_neg_fit(setup, neg);
  } else {
    throw std::invalid_argument("unknown fit '" + opt.fit + "' (fixed-prior or pb-neg)");
  }
  const BoundCheckReport rep =
      verify_bound(setup, opt.trials, opt.delta, lambda, fit, opt.seed, opt.threads);

  ordered_json config = {{"subcommand", "bound-check"},
                         {"vocab_size", opt.vocab_size},
                         {"dim", opt.dim},
                         {"gamma", opt.gamma},
                         {"pi", pi},
                         {"k", opt.k},
                         {"sigma2_p", opt.sigma2_p},
                         {"sentence_len", opt.sentence_len},
                         {"trials", opt.trials},
                         {"delta", opt.delta},
                         {"lambda", lambda},
                         {"n", n},
                         {"fit", opt.fit},
                         {"seed", opt.seed},
                         {"threads", opt.threads},
                         {"out", opt.out}};
  if (opt.fit == "pb-neg") config["neg"] = neg_config_json(neg);
  const ordered_json report = {{"trials", rep.trials},
                               {"delta", rep.delta},
                               {"lambda", rep.lambda},
                               {"violation_rate", rep.violation_rate},
                               {"mean_bound", rep.mean_bound},
                               {"mean_true_risk", rep.mean_true_risk},
                               {"mean_emp_risk", rep.mean_emp_risk},
                               {"mean_kl", rep.mean_kl},
                               {"config", config}};
  write_file_atomically(opt.out, dump(report));
}

namespace {

void add_shared(CLI::App* app, std::uint64_t& seed, std::size_t& threads, std::string& out,
                const std::string& out_help) {
  app->add_option("--seed", seed, "Random seed")->capture_default_str();
  app->add_option("--threads", threads, "Worker threads (1 = deterministic)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--out", out, out_help)->required();
}

void add_neg_flags(CLI::App* app, NegTrainConfig& neg) {
  app->add_option("--negatives", neg.negatives, "Negatives per target")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--epochs", neg.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--lr", neg.lr0, "Initial learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--mc-samples", neg.mc_samples, "Noise draws per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--power", neg.power, "Noise distribution exponent")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Skip-gram word vectors and PAC-Bayes sentence vectors"};
  app.require_subcommand(1);

  TrainWordsOptions tw;
  tw.skipgram.threads = 1;
  auto* c_tw = app.add_subcommand("train-words", "Train Skip-gram input and output vectors");
  c_tw->add_option("--corpus", tw.corpus, "Text corpus, one sentence or document per line")
      ->required()
      ->check(CLI::ExistingFile);
  add_shared(c_tw, tw.skipgram.seed, tw.skipgram.threads, tw.out_prefix,
             "Output prefix; writes <prefix>.in.vec and <prefix>.out.vec");
  c_tw->add_option("--dim", tw.skipgram.dim, "Vector size")->check(CLI::PositiveNumber)->capture_default_str();
  c_tw->add_option("--window", tw.skipgram.window, "Maximum window")->check(CLI::PositiveNumber)->capture_default_str();
  c_tw->add_option("--sample", tw.skipgram.subsample, "Subsampling threshold (<= 0 disables)")->capture_default_str();
  c_tw->add_option("--epochs", tw.skipgram.epochs, "Epochs")->check(CLI::PositiveNumber)->capture_default_str();
  c_tw->add_option("--negative", tw.skipgram.negatives, "Negatives per pair")->check(CLI::PositiveNumber)->capture_default_str();
  c_tw->add_option("--power", tw.skipgram.power, "Noise exponent")->check(CLI::PositiveNumber)->capture_default_str();
  c_tw->add_option("--lr", tw.skipgram.lr0, "Initial learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_tw->add_option("--min-count", tw.skipgram.min_count, "Minimum word count")->check(CLI::PositiveNumber)->capture_default_str();

  EmbedOptions em;
  em.neg.threads = 1;
  auto* c_em = app.add_subcommand("embed", "Compute sentence vectors");
  c_em->add_option("--in-vectors", em.in_vectors, "Input word vectors (word2vec text)")
      ->required()
      ->check(CLI::ExistingFile);
  c_em->add_option("--out-vectors", em.out_vectors, "Output word vectors (word2vec text)")
      ->required()
      ->check(CLI::ExistingFile);
  c_em->add_option("--sentences", em.sentences, "Sentences, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  add_shared(c_em, em.neg.seed, em.neg.threads, em.out, "Sentence-vector TSV");
  c_em->add_option("--method", em.method, "Sentence-vector method")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  c_em->add_option("--lambda", em.lambda, "Trade-off lambda (> 0, or 'inf')")
      ->check([](const std::string& s) {
        try {
          parse_lambda(s);
        } catch (const std::exception& e) {
          return std::string(e.what());
        }
        return std::string();
      })
      ->capture_default_str();
  c_em->add_option("--sigma2-p", em.sigma2_p, "Prior variance")->check(CLI::PositiveNumber)->capture_default_str();
  c_em->add_flag("--switch-roles", em.switch_roles, "Swap the roles of input and output vectors");
  c_em->add_flag("--emit-var", em.emit_var, "Append the posterior variance as the last column");
  c_em->add_flag("--skip-empty", em.skip_empty, "Emit zero vectors for sentences with no known words");
  c_em->add_option("--fit-sentences", em.fit_sentences,
                   "Sentences used for IDF and word posteriors (default: --sentences)")
      ->check(CLI::ExistingFile);
  c_em->add_option("--bank-out", em.bank_out, "Dump of the trained posteriors (pb-neg, w-pb-neg)");
  add_neg_flags(c_em, em.neg);

  EvalOptions ev;
  auto* c_ev = app.add_subcommand("eval", "Cross-validated logistic-regression evaluation");
  c_ev->add_option("--train-vectors", ev.train_vectors, "Training sentence vectors (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--test-vectors", ev.test_vectors, "Test sentence vectors (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  c_ev->add_option("--lambdas", ev.lambdas, "Lambda of each vector file pair");
  c_ev->add_option("--train-labels", ev.train_labels, "Training labels")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--test-labels", ev.test_labels, "Test labels")->required()->check(CLI::ExistingFile);
  add_shared(c_ev, ev.eval.seed, ev.eval.threads, ev.out, "JSON report");
  c_ev->add_option("--method", ev.method, "Method name recorded in the report")->capture_default_str();
  c_ev->add_option("--folds", ev.eval.folds, "Cross-validation folds")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  c_ev->add_option("--repeats", ev.eval.repeats, "Repeats with different fold seeds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_ev->add_option("--c-grid", ev.eval.c_grid, "Inverse regularization strengths")
      ->check(CLI::PositiveNumber);
  c_ev->add_option("--normalize", ev.normalize, "none, l2 or grid-both")
      ->check(CLI::IsMember({"none", "l2", "grid-both"}))
      ->capture_default_str();
  c_ev->add_option("--tol", ev.eval.tol, "Gradient-norm tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  c_ev->add_option("--max-iter", ev.eval.max_iter, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  c_ev->add_flag("--drop-var", ev.drop_var, "Ignore the trailing variance column");

  BoundCheckOptions bc;
  double pi = 0.0, bound_lambda = 0.0;
  auto* c_bc = app.add_subcommand("bound-check", "Monte-Carlo check of the PAC-Bayes bound");
  add_shared(c_bc, bc.seed, bc.threads, bc.out, "JSON report");
  c_bc->add_option("--trials", bc.trials, "Independent datasets")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--delta", bc.delta, "Confidence parameter in (0, 1)")
      ->check([](const std::string& s) {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v < 1.0) return std::string();
        } catch (const std::exception&) {
        }
        return std::string("delta must be in (0, 1)");
      })
      ->capture_default_str();
  auto* o_lambda = c_bc->add_option("--lambda", bound_lambda, "Bound lambda (default: n)")
                       ->check(CLI::PositiveNumber);
  c_bc->add_option("--vocab-size", bc.vocab_size, "Vocabulary size")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--dim", bc.dim, "Vector size")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--gamma", bc.gamma, "Dirichlet concentration")->check(CLI::PositiveNumber)->capture_default_str();
  auto* o_pi = c_bc->add_option("--pi", pi, "Test-time P(y = +1) (default: 1/(1+k))")
                   ->check(CLI::Range(0.0, 1.0));
  c_bc->add_option("--k", bc.k, "Negatives per positive")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--sigma2-p", bc.sigma2_p, "Prior variance")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--sentence-len", bc.sentence_len, "Positives per dataset")->check(CLI::PositiveNumber)->capture_default_str();
  c_bc->add_option("--fit", bc.fit, "Posterior: fixed-prior or pb-neg")
      ->check(CLI::IsMember({"fixed-prior", "pb-neg"}))
      ->capture_default_str();
  std::string fit_lambda = "1";
  c_bc->add_option("--fit-lambda", fit_lambda, "Lambda of the pb-neg fit (> 0, or 'inf')")->capture_default_str();
  add_neg_flags(c_bc, bc.neg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_tw->parsed()) {
      train_words(tw);
    } else if (c_em->parsed()) {
      embed(em);
    } else if (c_ev->parsed()) {
      eval(ev);
    } else if (c_bc->parsed()) {
      if (o_pi->count()) bc.pi = pi;
      if (o_lambda->count()) bc.lambda = bound_lambda;
      bc.neg.lambda = parse_lambda(fit_lambda);
      bc.neg.seed = bc.seed;
      bound_check(bc);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pbsv::cli
