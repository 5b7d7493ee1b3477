#include "pbsv/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pbsv {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_word2vec(std::ostream& out, const std::vector<std::string>& words,
                    const EmbeddingMatrix& vectors) {
  require_same_dim(words.size(), vectors.vocab_size(), "word list vs embedding rows");
  out << vectors.vocab_size() << ' ' << vectors.dim() << '\n';
  for (std::size_t w = 0; w < words.size(); ++w) {
    out << words[w];
    for (const double v : vectors.row(w)) out << ' ' << format_real(v);
    out << '\n';
  }
}

WordVectors read_word2vec(std::istream& in, EmbeddingRole role) {
  std::size_t rows = 0, dim = 0;
  if (!(in >> rows >> dim) || dim == 0) {
    throw std::runtime_error("malformed word2vec header");
  }
  WordVectors wv;
  wv.vectors.role = role;
  wv.vectors.values = Matrix(rows, dim);
  wv.words.reserve(rows);
  std::string word;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!(in >> word)) throw std::runtime_error("word2vec file ends early at row " + std::to_string(r));
    wv.words.push_back(word);
    for (double& v : wv.vectors.values.row(r)) {
      if (!(in >> v)) throw std::runtime_error("malformed vector for word " + word);
    }
  }
  return wv;
}

WordVectors read_word2vec_file(const std::filesystem::path& path, EmbeddingRole role) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file " + path.string());
  return read_word2vec(in, role);
}

void write_vector_tsv(std::ostream& out, const Matrix& rows,
                      const std::vector<double>* variances) {
  if (variances) require_same_dim(variances->size(), rows.rows(), "variance column");
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    out << r;
    for (const double v : rows.row(r)) out << '\t' << format_real(v);
    if (variances) out << '\t' << format_real((*variances)[r]);
    out << '\n';
  }
}

Matrix read_vector_tsv(std::istream& in, bool drop_last_column) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::getline(fields, cell, '\t');  // index
    std::vector<double> values;
    while (std::getline(fields, cell, '\t')) {
      char* end = nullptr;
      values.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw std::runtime_error("non-numeric cell in vector TSV: " + cell);
    }
    if (drop_last_column) {
      if (values.empty()) throw std::runtime_error("no variance column to drop");
      values.pop_back();
    }
    if (rows.empty()) width = values.size();
    if (values.size() != width) throw std::runtime_error("ragged vector TSV");
    rows.push_back(std::move(values));
  }
  Matrix m(rows.size(), width);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<int> read_labels(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    labels.push_back(std::stoi(line));
  }
  return labels;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace pbsv
