#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pbsv/cli.hpp"
#include "pbsv/closed_form.hpp"
#include "pbsv/corpus.hpp"
#include "pbsv/pac_bayes.hpp"
#include "pbsv/skipgram.hpp"

namespace py = pybind11;
using namespace pbsv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_embedding(const Array& a, EmbeddingRole role) {
  if (a.ndim() != 2) throw std::invalid_argument("word vectors must be a 2-d array");
  EmbeddingMatrix e;
  e.role = role;
  e.values = Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), e.values.data().begin());
  return e;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::tuple posterior_tuple(const GaussianPosterior& q) {
  Array mu(std::vector<py::ssize_t>{static_cast<py::ssize_t>(q.mu.size())});
  std::copy(q.mu.begin(), q.mu.end(), mu.mutable_data());
  return py::make_tuple(mu, q.var);
}

RoleAssignment role_of(bool switch_roles) {
  return switch_roles ? RoleAssignment::switched : RoleAssignment::standard;
}

}  // namespace

PYBIND11_MODULE(_pbsv, m) {
  m.doc() = "Skip-gram word vectors and PAC-Bayes sentence vectors";

  m.def("normalize_text", [](const std::string& s) { return normalize_text(s); },
        "Lowercase and split on non-letters.");

  m.def(
      "train_skipgram",
      [](const std::vector<std::string>& lines, std::size_t dim, std::size_t window,
         std::size_t negatives, std::size_t epochs, double subsample, std::int64_t min_count,
         std::uint64_t seed, std::size_t threads) {
        SkipgramConfig cfg;
        cfg.dim = dim;
        cfg.window = window;
        cfg.negatives = negatives;
        cfg.epochs = epochs;
        cfg.subsample = subsample;
        cfg.min_count = min_count;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.validate();
        std::vector<std::vector<std::string>> tokenized;
        std::vector<std::string> all;
        for (const auto& l : lines) {
          tokenized.push_back(normalize_text(l));
          all.insert(all.end(), tokenized.back().begin(), tokenized.back().end());
        }
        const Vocabulary vocab = Vocabulary::build(all, min_count);
        std::vector<Sentence> corpus;
        for (const auto& t : tokenized) {
          for (auto& chunk : chunk_stream(vocab.encode(t))) corpus.push_back(std::move(chunk));
        }
        SkipgramResult res;
        {
          py::gil_scoped_release release;
          res = train_skipgram(corpus, vocab, cfg);
        }
        return py::make_tuple(vocab.words(), to_array(res.input.values),
                              to_array(res.output.values));
      },
      "Train on one sentence per line; returns (words, input_vectors, output_vectors).",
      py::arg("lines"), py::arg("dim") = 100, py::arg("window") = 5, py::arg("negatives") = 15,
      py::arg("epochs") = 5, py::arg("subsample") = 1e-4, py::arg("min_count") = 5,
      py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "pb_l2",
      [](const std::vector<WordId>& sentence, const Array& inputs, const Array& outputs,
         double lam, double sigma2_p, bool switch_roles) {
        return posterior_tuple(pb_l2_posterior(sentence, to_embedding(inputs, EmbeddingRole::input),
                                               to_embedding(outputs, EmbeddingRole::output),
                                               Lambda(lam), sigma2_p, role_of(switch_roles)));
      },
      "Closed-form squared-L2 posterior; returns (mu, var). lam may be float('inf').",
      py::arg("sentence"), py::arg("inputs"), py::arg("outputs"), py::arg("lam"),
      py::arg("sigma2_p") = 1.0, py::arg("switch_roles") = false);

  m.def(
      "pb_idf_l2",
      [](const std::vector<WordId>& sentence, const Array& inputs, const Array& outputs,
         double inv_lambda, std::vector<double> idf, bool switch_roles) {
        return posterior_tuple(pb_idf_l2_posterior(
            sentence, to_embedding(inputs, EmbeddingRole::input),
            to_embedding(outputs, EmbeddingRole::output), inv_lambda, IdfTable(std::move(idf)),
            role_of(switch_roles)));
      },
      "Closed-form IDF-weighted posterior; returns (mu, var).", py::arg("sentence"),
      py::arg("inputs"), py::arg("outputs"), py::arg("inv_lambda"), py::arg("idf"),
      py::arg("switch_roles") = false);

  m.def(
      "compute_idf",
      [](std::vector<Sentence> sentences, std::size_t vocab_size) {
        const IdfTable t = compute_idf(SentenceDataset::from_sentences(std::move(sentences), vocab_size));
        std::vector<double> out(t.size());
        for (std::size_t w = 0; w < t.size(); ++w) {
          out[w] = t.contains(static_cast<WordId>(w)) ? t.at(static_cast<WordId>(w)) : std::nan("");
        }
        return out;
      },
      "IDF per word id; NaN for words that never occur.", py::arg("sentences"),
      py::arg("vocab_size"));

  m.def(
      "gaussian_kl",
      [](std::vector<double> mu_q, double var_q, const std::vector<double>& mu_p, double var_p) {
        return gaussian_kl(GaussianPosterior{std::move(mu_q), var_q}, mu_p, var_p);
      },
      "KL between isotropic Gaussians.", py::arg("mu_q"), py::arg("var_q"), py::arg("mu_p"),
      py::arg("var_p"));

  m.def("catoni_bound", &catoni_bound, "Catoni PAC-Bayes bound.", py::arg("emp_risk"),
        py::arg("kl"), py::arg("lam"), py::arg("n"), py::arg("delta"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "pbsv");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        py::gil_scoped_release release;
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      "Run a command-line subcommand in-process; returns the exit code.", py::arg("args"));
}
