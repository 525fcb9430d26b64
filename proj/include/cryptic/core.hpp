// Shared clue types, letter normalization and enumeration patterns.
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cryptic {

/// Base for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PatternError : public Error {
 public:
  using Error::Error;
};

/// Letter enumeration of an answer, e.g. "6", "3,4" or "5-2".
class Pattern {
 public:
  enum class Separator { Comma, Hyphen };

  Pattern() = default;
  Pattern(std::vector<int> groups, std::vector<Separator> separators);

  /// Digits separated by ',' or '-'; whitespace is ignored.
  static Pattern parse(std::string_view text);

  const std::vector<int>& groups() const { return groups_; }
  const std::vector<Separator>& separators() const { return separators_; }
  int total() const { return total_; }

  std::string render() const;

  bool operator==(const Pattern&) const = default;

 private:
  std::vector<int> groups_;
  std::vector<Separator> separators_;
  int total_ = 0;
};

enum class Direction { Across, Down };

struct DefinitionSpan {
  std::string text;
  std::size_t start = 0;  // offsets into the brace-free clue
  std::size_t end = 0;
  bool operator==(const DefinitionSpan&) const = default;
};

struct Clue {
  std::string id;
  std::string surface;  // clue text without definition braces
  Pattern pattern;
  Direction direction = Direction::Across;
  std::optional<std::string> gold_answer;
  std::optional<std::string> gold_definition;  // surface with `{}` spans
  std::optional<std::string> gold_wordplay;
  // Unrecognised dataset keys, kept verbatim (key, YAML text) for round trips.
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const Clue&) const = default;
};

/// Throws Error when a Clue breaks its invariants (answer/pattern mismatch,
/// definition differing from surface by more than braces).
void validate(const Clue& clue);

/// The closed set of wordplay actions a proof may name.
enum class ActionKind {
  Anagram,
  RemoveFirst,
  Initials,
  RemoveLast,
  GoesInside,
  GoesOutside,
  Reverse,
  Substring,
  Homophone,
};

inline constexpr ActionKind kAllActions[] = {
    ActionKind::Anagram,    ActionKind::RemoveFirst, ActionKind::Initials,
    ActionKind::RemoveLast, ActionKind::GoesInside,  ActionKind::GoesOutside,
    ActionKind::Reverse,    ActionKind::Substring,   ActionKind::Homophone,
};

/// "ANAGRAM", "REMOVE_FIRST", ...
std::string_view to_string(ActionKind kind);

/// Accepts the enum names, optionally prefixed by "Action.", plus the
/// IS_OUTSIDE alias for GOES_OUTSIDE.
std::optional<ActionKind> parse_action(std::string_view name);

/// Uppercased ASCII letters only. Latin-1 range accents in UTF-8 input are
/// folded to their base letter; everything else is dropped.
std::string normalize_letters(std::string_view text);

/// Total-letter comparison; word boundaries are not checked.
bool pattern_matches(std::string_view answer, const Pattern& pattern);

/// $CRYPTIC_DATA_DIR when set, else the data directory of the source tree.
std::filesystem::path default_data_dir();

// Small string helpers shared across modules.
std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split_words(std::string_view text);

}  // namespace cryptic
