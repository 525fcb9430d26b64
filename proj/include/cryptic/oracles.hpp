// The five external proof predicates, with near-miss notes for hinting.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cryptic/candidates.hpp"
#include "cryptic/core.hpp"
#include "cryptic/lexicon.hpp"

namespace cryptic {

struct OracleVerdict {
  bool ok = false;
  std::vector<std::string> near_misses;

  /// Near-miss notes joined with "; ".
  std::string hint() const;
  bool operator==(const OracleVerdict&) const = default;
};

/// Pluggable synonym check. Implementations must be pure and thread-safe.
class SynonymBackend {
 public:
  virtual ~SynonymBackend() = default;
  virtual OracleVerdict check(const Lexicon& lexicon, std::string_view phrase, std::string_view candidate) const = 0;
};

/// Exact thesaurus lookup.
class ThesaurusSynonyms : public SynonymBackend {
 public:
  OracleVerdict check(const Lexicon& lexicon, std::string_view phrase, std::string_view candidate) const override;
};

/// Thesaurus lookup, falling back to embedding cosine >= threshold.
class EmbeddingSynonyms : public SynonymBackend {
 public:
  static constexpr double kDefaultThreshold = 0.55;
  explicit EmbeddingSynonyms(std::shared_ptr<const EmbeddingTable> table, double threshold = kDefaultThreshold);
  OracleVerdict check(const Lexicon& lexicon, std::string_view phrase, std::string_view candidate) const override;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  double threshold_;
};

/// Predicate set over one immutable lexicon.
class Oracles {
 public:
  explicit Oracles(std::shared_ptr<const Lexicon> lexicon,
                   std::shared_ptr<const SynonymBackend> synonyms = std::make_shared<ThesaurusSynonyms>());

  const Lexicon& lexicon() const { return *lexicon_; }

  OracleVerdict is_synonym(std::string_view phrase, std::string_view candidate,
                           const std::optional<Pattern>& pattern = std::nullopt) const;
  OracleVerdict is_abbreviation(std::string_view phrase, std::string_view abbr) const;
  OracleVerdict action_type(std::string_view phrase, ActionKind action) const;
  OracleVerdict is_anagram(std::string_view letters, std::string_view word) const;
  OracleVerdict is_homophone(std::string_view phrase, std::string_view candidate) const;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const SynonymBackend> synonyms_;
};

/// Lexicon-only forms using the exact thesaurus backend.
OracleVerdict is_synonym(const Lexicon& lex, std::string_view phrase, std::string_view candidate,
                         const std::optional<Pattern>& pattern = std::nullopt);
OracleVerdict is_abbreviation(const Lexicon& lex, std::string_view phrase, std::string_view abbr);
OracleVerdict action_type(const Lexicon& lex, std::string_view phrase, ActionKind action);
OracleVerdict is_anagram(std::string_view letters, std::string_view word);
OracleVerdict is_homophone(const Lexicon& lex, std::string_view phrase, std::string_view candidate);

}  // namespace cryptic
