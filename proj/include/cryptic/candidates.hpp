// Embedding tables and nearest-neighbour decoy candidates.
//
// Text vector format: a header line `<count> <dimension>`, then one
// `word v1 ... vd` line per entry, space separated.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cryptic/core.hpp"

namespace cryptic {

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyCandidateSet : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
class BasicEmbeddingTable {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BasicEmbeddingTable() = default;
  BasicEmbeddingTable(std::vector<std::string> words, Matrix vectors,
                      std::filesystem::path source = {}, std::vector<std::string> warnings = {});

  int dimension() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const Matrix& vectors() const { return vectors_; }
  const std::filesystem::path& source() const { return source_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Case-folded exact lookup.
  std::optional<Vector> lookup(std::string_view word) const;

  /// Whole-phrase lookup, else the mean of in-vocabulary token vectors,
  /// else the zero vector.
  Vector embed(std::string_view phrase) const;

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::filesystem::path source_;
  std::vector<std::string> warnings_;
};

using EmbeddingTable = BasicEmbeddingTable<float>;

/// Duplicate words keep the first vector and add a warning to the table.
template <typename Scalar = float>
BasicEmbeddingTable<Scalar> load_embeddings(const std::filesystem::path& path);

template <typename Scalar = float>
BasicEmbeddingTable<Scalar> parse_embeddings(std::string_view text, const std::filesystem::path& source = {});

/// Cosine similarity; a zero vector scores 0 against anything.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  return std::clamp(Scalar(u.dot(v) / (nu * nv)), Scalar(-1), Scalar(1));
}

struct Candidate {
  std::string word;  // normalized letters
  double similarity = 0.0;
  bool operator==(const Candidate&) const = default;
};

/// Wordlist entries matching `pattern`, other than `exclude`, ranked by
/// cosine to the embedded span (descending, ties lexicographic). Throws
/// EmptyCandidateSet when no entry fits the pattern.
template <typename Scalar>
std::vector<Candidate> closest_candidates(std::string_view definition_span, const Pattern& pattern,
                                          std::string_view exclude, const BasicEmbeddingTable<Scalar>& table,
                                          std::span<const std::string> wordlist, std::size_t k);

/// One entry per line, '#' comments skipped.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

}  // namespace cryptic
