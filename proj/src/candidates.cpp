#include "cryptic/candidates.hpp"

#include <fstream>
#include <sstream>

#include "cryptic/lexicon.hpp"

namespace cryptic {

template <typename Scalar>
BasicEmbeddingTable<Scalar>::BasicEmbeddingTable(std::vector<std::string> words, Matrix vectors,
                                                 std::filesystem::path source, std::vector<std::string> warnings)
    : words_(std::move(words)), vectors_(std::move(vectors)), source_(std::move(source)),
      warnings_(std::move(warnings)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows()) {
    throw DimensionMismatch("embedding table has " + std::to_string(words_.size()) + " words but " +
                            std::to_string(vectors_.rows()) + " vectors");
  }
  for (Eigen::Index i = 0; i < vectors_.rows(); ++i) index_.emplace(Lexicon::fold(words_[i]), i);
}

template <typename Scalar>
std::optional<typename BasicEmbeddingTable<Scalar>::Vector> BasicEmbeddingTable<Scalar>::lookup(
    std::string_view word) const {
  auto it = index_.find(Lexicon::fold(word));
  if (it == index_.end()) return std::nullopt;
  return Vector(vectors_.row(it->second).transpose());
}

template <typename Scalar>
typename BasicEmbeddingTable<Scalar>::Vector BasicEmbeddingTable<Scalar>::embed(std::string_view phrase) const {
  if (auto whole = lookup(phrase)) return *whole;
  Vector sum = Vector::Zero(dimension());
  int hits = 0;
  for (const auto& token : split_words(phrase)) {
    if (auto v = lookup(token)) {
      sum += *v;
      ++hits;
    }
  }
  if (hits > 0) sum /= Scalar(hits);
  return sum;
}

template <typename Scalar>
BasicEmbeddingTable<Scalar> parse_embeddings(std::string_view text, const std::filesystem::path& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  long long count = -1;
  long long dimension = -1;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) break;
  }
  {
    std::istringstream header(line);
    if (!(header >> count >> dimension) || count < 0 || dimension <= 0) {
      throw FormatError(number, "expected header '<count> <dimension>'");
    }
    std::string extra;
    if (header >> extra) throw FormatError(number, "unexpected text after header");
  }

  std::vector<std::string> words;
  std::vector<Scalar> values;
  std::vector<std::string> warnings;
  std::unordered_map<std::string, std::size_t> seen;
  long long entries = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<Scalar> row;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(static_cast<Scalar>(v));
      } catch (const std::exception&) {
        throw FormatError(number, "bad number '" + tok + "'");
      }
    }
    if (static_cast<long long>(row.size()) != dimension) {
      throw DimensionMismatch("line " + std::to_string(number) + ": expected " + std::to_string(dimension) +
                              " values, got " + std::to_string(row.size()));
    }
    ++entries;
    const std::string key = Lexicon::fold(word);
    if (auto it = seen.find(key); it != seen.end()) {
      warnings.push_back("line " + std::to_string(number) + ": duplicate word '" + word +
                         "' ignored (first seen on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(key, number);
    words.push_back(word);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (entries != count) {
    throw FormatError(number, "header declares " + std::to_string(count) + " entries, found " +
                                  std::to_string(entries));
  }
  using Table = BasicEmbeddingTable<Scalar>;
  typename Table::Matrix m(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(dimension));
  if (!values.empty()) {
    m = Eigen::Map<const typename Table::Matrix>(values.data(), m.rows(), m.cols());
  }
  return Table(std::move(words), std::move(m), source, std::move(warnings));
}

template <typename Scalar>
BasicEmbeddingTable<Scalar> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embedding file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_embeddings<Scalar>(buf.str(), path);
}

template <typename Scalar>
std::vector<Candidate> closest_candidates(std::string_view definition_span, const Pattern& pattern,
                                          std::string_view exclude, const BasicEmbeddingTable<Scalar>& table,
                                          std::span<const std::string> wordlist, std::size_t k) {
  if (k == 0) throw Error("closest_candidates needs k >= 1");
  const auto query = table.embed(definition_span);
  const std::string excluded = normalize_letters(exclude);
  std::vector<Candidate> ranked;
  bool any_match = false;
  for (const auto& entry : wordlist) {
    if (!pattern_matches(entry, pattern)) continue;
    any_match = true;
    std::string letters = normalize_letters(entry);
    if (letters == excluded) continue;
    const auto v = table.embed(entry);
    ranked.push_back({std::move(letters), static_cast<double>(cosine(query, v))});
  }
  if (!any_match || ranked.empty()) {
    throw EmptyCandidateSet("no wordlist entry matches pattern " + pattern.render() +
                            (any_match ? " besides the excluded answer" : ""));
  }
  std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word < b.word;
  });
  ranked.erase(std::unique(ranked.begin(), ranked.end(),
                           [](const Candidate& a, const Candidate& b) { return a.word == b.word; }),
               ranked.end());
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open wordlist " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    words.push_back(t);
  }
  return words;
}

#define CRYPTIC_INSTANTIATE(S)                                                                                  \
  template class BasicEmbeddingTable<S>;                                                                       \
  template BasicEmbeddingTable<S> parse_embeddings<S>(std::string_view, const std::filesystem::path&);         \
  template BasicEmbeddingTable<S> load_embeddings<S>(const std::filesystem::path&);                            \
  template std::vector<Candidate> closest_candidates<S>(std::string_view, const Pattern&, std::string_view,    \
                                                        const BasicEmbeddingTable<S>&,                         \
                                                        std::span<const std::string>, std::size_t);
CRYPTIC_INSTANTIATE(float)
CRYPTIC_INSTANTIATE(double)
#undef CRYPTIC_INSTANTIATE

}  // namespace cryptic
