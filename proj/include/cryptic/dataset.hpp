// Wordplay dataset YAML documents (title/url/author + clue list).
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cryptic/core.hpp"

namespace cryptic {

class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnbalancedBraces : public Error {
 public:
  using Error::Error;
};

struct PuzzleDocument {
  std::string title;
  std::string url;
  std::string author;
  std::vector<Clue> clues;
  bool operator==(const PuzzleDocument&) const = default;
};

/// Reads every YAML document in the file. Clue ids are `<url slug>#<index>`.
std::vector<PuzzleDocument> load_puzzles(const std::filesystem::path& path);
std::vector<PuzzleDocument> parse_puzzles(std::string_view yaml_text);

/// Canonical emission: document keys title, url, author, clues; clue keys
/// clue, pattern, ad, answer, wordplay, then preserved extras in load order.
std::string dump_puzzles(const std::vector<PuzzleDocument>& docs);
void save_puzzles(const std::filesystem::path& path, const std::vector<PuzzleDocument>& docs);

struct ExtractedDefinition {
  std::vector<DefinitionSpan> spans;
  std::string plain;
};

/// Splits `{...}` definition markers out of an annotated clue.
ExtractedDefinition extract_definition(std::string_view annotated_clue);

/// Inverse of extract_definition.
std::string annotate_definition(std::string_view plain, const std::vector<DefinitionSpan>& spans);

}  // namespace cryptic
