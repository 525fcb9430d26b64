// Line-oriented lexicon files backing the oracle predicates.
//
//   abbreviations.tsv   SHORT<TAB>phrase
//   thesaurus.tsv       phrase<TAB>candidate
//   indicators*.tsv     ACTION<TAB>word or phrase
//   homophones.tsv      word<TAB>word
//   wordlist.txt        one entry per line
//
// Blank lines and lines starting with '#' are ignored. Keys are stored
// case-folded; the first spelling seen is kept for display in hints.
#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cryptic/core.hpp"

namespace cryptic {

class LexiconError : public Error {
 public:
  using Error::Error;
};

class Lexicon {
 public:
  void add_abbreviation(std::string_view short_form, std::string_view phrase);
  void add_synonym(std::string_view phrase, std::string_view candidate);
  void add_indicator(ActionKind action, std::string_view phrase);
  void add_homophone(std::string_view a, std::string_view b);
  void add_word(std::string_view word);

  void load_abbreviations(const std::filesystem::path& path);
  void load_thesaurus(const std::filesystem::path& path);
  void load_indicators(const std::filesystem::path& path);
  void load_homophones(const std::filesystem::path& path);
  void load_wordlist(const std::filesystem::path& path);

  /// Loads the standard file names from a directory; absent files are skipped.
  /// Every `indicators*.tsv` file is loaded, in name order.
  static Lexicon load_directory(const std::filesystem::path& dir);

  /// Display spellings of the phrases a short form stands for, in file order.
  std::vector<std::string> expansions(std::string_view short_form) const;
  /// Short forms (uppercase) for a phrase, in file order.
  std::vector<std::string> abbreviations_of(std::string_view phrase) const;
  bool has_abbreviation(std::string_view phrase, std::string_view short_form) const;

  bool in_thesaurus(std::string_view phrase) const;
  /// Display spellings of the thesaurus entries for a phrase, in file order.
  std::vector<std::string> synonyms_of(std::string_view phrase) const;
  bool has_synonym(std::string_view phrase, std::string_view candidate) const;

  bool signifies(std::string_view phrase, ActionKind action) const;
  std::vector<ActionKind> actions_for(std::string_view phrase) const;
  bool is_indicator(std::string_view phrase) const { return !actions_for(phrase).empty(); }

  bool homophone_pair(std::string_view a, std::string_view b) const;

  const std::vector<std::string>& wordlist() const { return words_; }

  /// Case-folds and collapses whitespace: "  An  Artist " -> "an artist".
  static std::string fold(std::string_view phrase);

 private:
  using Index = std::map<std::string, std::vector<std::string>>;
  static void append_unique(Index& index, const std::string& key, std::string value);

  Index abbrev_forward_;  // folded short form -> display phrases
  Index abbrev_inverse_;  // folded phrase -> uppercase short forms
  Index thesaurus_;       // folded phrase -> display candidates
  std::map<std::string, std::set<ActionKind>> indicators_;  // folded phrase -> actions
  std::set<std::pair<std::string, std::string>> homophones_;
  std::vector<std::string> words_;
  std::set<std::string> word_set_;
};

}  // namespace cryptic
