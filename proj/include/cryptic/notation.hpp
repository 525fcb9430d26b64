// Parse tree for community wordplay annotations such as
//   PROP (support) + (ALSO)* (*broadcast)
//   [c]RAVEN (cowardly) - 'C' (i.e. circa, about) (-fly away)
// and a canonical renderer whose output parses back to the same tree.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cryptic/box.hpp"
#include "cryptic/core.hpp"

namespace cryptic {

class Lexicon;

struct WordplayNode;

namespace node {

struct Literal {
  std::string letters;
  bool operator==(const Literal&) const = default;
};

struct SynonymOf {
  std::string phrase;
  std::string letters;
  bool operator==(const SynonymOf&) const = default;
};

struct AbbrevOf {
  std::string phrase;
  std::string letters;
  bool operator==(const AbbrevOf&) const = default;
};

struct Anagram {
  Box<WordplayNode> source;
  std::string indicator;
  std::string result;  // empty until the arrangement is known
  bool operator==(const Anagram&) const = default;
};

struct Reversal {
  Box<WordplayNode> source;
  std::string indicator;
  bool operator==(const Reversal&) const = default;
};

enum class DeletionKind { First, Last, Inner };

struct Deletion {
  Box<WordplayNode> source;  // leaf: Literal, SynonymOf or AbbrevOf
  std::string removed;
  DeletionKind kind = DeletionKind::First;
  std::string indicator;
  std::size_t offset = 0;  // where `removed` sits in the source letters
  bool operator==(const Deletion&) const = default;
};

struct Initials {
  std::vector<std::string> phrases;
  std::string indicator;
  bool operator==(const Initials&) const = default;
};

struct Hidden {
  std::string host_text;  // lowercase words, space separated
  std::string indicator;
  std::string letters;
  bool operator==(const Hidden&) const = default;
};

/// Which way round the indicator reads: "A around B" or "B in A".
enum class Placement { Outside, Inside };

struct Container {
  Box<WordplayNode> outer;
  Box<WordplayNode> inner;
  std::string indicator;
  int outer_split = 0;  // inner goes before outer letter at this index
  Placement placement = Placement::Outside;
  bool operator==(const Container&) const = default;
};

struct Homophone {
  std::string sounds_like;
  std::string origin;  // clue phrase the spoken word stands for, may be empty
  std::string indicator;
  std::string letters;
  bool operator==(const Homophone&) const = default;
};

struct DoubleDefinition {
  std::string letters;  // filled in when parsed against a known answer
  bool operator==(const DoubleDefinition&) const = default;
};

struct Sequence {
  std::vector<WordplayNode> parts;
  bool operator==(const Sequence&) const = default;
};

}  // namespace node

struct WordplayNode {
  using Variant = std::variant<node::Literal, node::SynonymOf, node::AbbrevOf, node::Anagram, node::Reversal,
                               node::Deletion, node::Initials, node::Hidden, node::Container, node::Homophone,
                               node::DoubleDefinition, node::Sequence>;
  Variant value;

  template <typename T>
  WordplayNode(T v) : value(std::move(v)) {}  // NOLINT: node kinds convert implicitly
  WordplayNode() : value(node::Literal{}) {}

  template <typename T>
  const T* as() const { return std::get_if<T>(&value); }
  template <typename T>
  T* as() { return std::get_if<T>(&value); }

  bool operator==(const WordplayNode&) const = default;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t position, std::string matched_prefix)
      : Error(message + " at offset " + std::to_string(position)), message_(std::move(message)),
        position_(position), matched_prefix_(std::move(matched_prefix)) {}

  const std::string& message() const { return message_; }
  std::size_t position() const { return position_; }
  /// The longest prefix of the input that parsed before the failure.
  const std::string& matched_prefix() const { return matched_prefix_; }

 private:
  std::string message_;
  std::size_t position_;
  std::string matched_prefix_;
};

struct ParseOptions {
  /// Classifies short leaves as abbreviations and bare glosses as
  /// indicators. Without it, the first bare gloss is always an origin.
  const Lexicon* lexicon = nullptr;
  /// Answer letters used to settle anagram orders, container insertion
  /// points, homophone spellings and double definitions.
  std::optional<std::string> answer;
};

WordplayNode parse_wordplay(std::string_view annotation, const ParseOptions& options = {});

/// Letters the node contributes once its action is applied.
std::string surface_letters(const WordplayNode& node);

/// Canonical notation; parse_wordplay(render_wordplay(n)) == n.
std::string render_wordplay(const WordplayNode& node);

/// Letters a node contributes whose length does not depend on an answer,
/// or nullopt for homophones and double definitions still unresolved.
std::optional<std::size_t> known_length(const WordplayNode& node);

/// Fills in answer-dependent fields (anagram order, container split,
/// homophone spelling, double definition letters) from `letters`.
/// Returns false if the node cannot produce exactly those letters.
bool resolve_against(WordplayNode& node, std::string_view letters);

/// Debug-friendly tree dump, one node per line.
std::string describe(const WordplayNode& node);

}  // namespace cryptic
