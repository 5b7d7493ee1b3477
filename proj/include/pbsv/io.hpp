#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pbsv/matrix.hpp"

namespace pbsv {

struct WordVectors {
  std::vector<std::string> words;
  EmbeddingMatrix vectors;
};

/// word2vec text format: header `V d`, then `word v1 ... vd` per row.
void write_word2vec(std::ostream& out, const std::vector<std::string>& words,
                    const EmbeddingMatrix& vectors);
WordVectors read_word2vec(std::istream& in, EmbeddingRole role);
WordVectors read_word2vec_file(const std::filesystem::path& path, EmbeddingRole role);

/// `index<TAB>v1<TAB>...<TAB>vd[<TAB>var]` per row.
void write_vector_tsv(std::ostream& out, const Matrix& rows,
                      const std::vector<double>* variances = nullptr);

/// Reads a vector TSV. When `drop_last_column` is set the trailing variance
/// column is discarded.
Matrix read_vector_tsv(std::istream& in, bool drop_last_column = false);

/// Integer class id per line.
std::vector<int> read_labels(std::istream& in);

/// Lines of a text file, in order (trailing '\r' stripped).
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Shortest round-tripping-enough text for reports: 9 significant digits.
std::string format_real(double x);

/// Writes via a temporary sibling file and renames, so a failed run never
/// leaves a truncated artifact behind.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace pbsv
