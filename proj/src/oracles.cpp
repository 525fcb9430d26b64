#include "cryptic/oracles.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "cryptic/phonetic.hpp"

namespace cryptic {

namespace {

std::string squote(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string action_name(ActionKind k) { return "Action." + std::string(to_string(k)); }

}  // namespace

std::string OracleVerdict::hint() const { return join(near_misses, "; "); }

OracleVerdict ThesaurusSynonyms::check(const Lexicon& lexicon, std::string_view phrase,
                                       std::string_view candidate) const {
  if (lexicon.has_synonym(phrase, candidate)) return {true, {}};
  OracleVerdict v;
  if (!lexicon.in_thesaurus(phrase)) {
    v.near_misses.push_back(squote(phrase) + " is not in the thesaurus");
  } else {
    v.near_misses.push_back(squote(candidate) + " is not a known synonym for " + squote(phrase) + "; " +
                            squote(phrase) + " has synonyms : " + join(lexicon.synonyms_of(phrase), ", "));
  }
  return v;
}

EmbeddingSynonyms::EmbeddingSynonyms(std::shared_ptr<const EmbeddingTable> table, double threshold)
    : table_(std::move(table)), threshold_(threshold) {
  if (!table_) throw Error("embedding synonym backend needs a table");
}

OracleVerdict EmbeddingSynonyms::check(const Lexicon& lexicon, std::string_view phrase,
                                       std::string_view candidate) const {
  OracleVerdict v = ThesaurusSynonyms{}.check(lexicon, phrase, candidate);
  if (v.ok) return v;
  const double sim = cosine(table_->embed(phrase), table_->embed(candidate));
  if (sim >= threshold_) return {true, {}};
  char buf[96];
  std::snprintf(buf, sizeof buf, "embedding similarity %.2f is below %.2f", sim, threshold_);
  v.near_misses.emplace_back(buf);
  return v;
}

Oracles::Oracles(std::shared_ptr<const Lexicon> lexicon, std::shared_ptr<const SynonymBackend> synonyms)
    : lexicon_(std::move(lexicon)), synonyms_(std::move(synonyms)) {
  if (!lexicon_) throw Error("oracles need a lexicon");
  if (!synonyms_) synonyms_ = std::make_shared<ThesaurusSynonyms>();
}

OracleVerdict Oracles::is_synonym(std::string_view phrase, std::string_view candidate,
                                  const std::optional<Pattern>& pattern) const {
  OracleVerdict v;
  const bool fits = !pattern || pattern_matches(candidate, *pattern);
  if (!fits) {
    v.near_misses.push_back(squote(candidate) + " does not match pattern " + squote(pattern->render()));
  }
  bool related = normalize_letters(phrase) == normalize_letters(candidate) && !normalize_letters(phrase).empty();
  if (!related) {
    OracleVerdict s = synonyms_->check(*lexicon_, phrase, candidate);
    related = s.ok;
    v.near_misses.insert(v.near_misses.end(), s.near_misses.begin(), s.near_misses.end());
  }
  v.ok = fits && related;
  if (v.ok) v.near_misses.clear();
  return v;
}

OracleVerdict Oracles::is_abbreviation(std::string_view phrase, std::string_view abbr) const {
  if (lexicon_->has_abbreviation(phrase, abbr)) return {true, {}};
  OracleVerdict v;
  const auto shorts = lexicon_->abbreviations_of(phrase);
  if (shorts.empty()) {
    v.near_misses.push_back(squote(phrase) + " does not have a valid abbreviation");
  } else {
    v.near_misses.push_back(squote(phrase) + " abbreviates to : " + join(shorts, ", "));
  }
  const auto longs = lexicon_->expansions(abbr);
  if (longs.empty()) {
    v.near_misses.push_back(squote(abbr) + " is not a known abbreviation");
  } else {
    v.near_misses.push_back(squote(abbr) + " is an abbreviation for : " + join(longs, ", "));
  }
  return v;
}

OracleVerdict Oracles::action_type(std::string_view phrase, ActionKind action) const {
  if (lexicon_->signifies(phrase, action)) return {true, {}};
  OracleVerdict v;
  // Longest, then leftmost, proper sub-phrase that does signify the action.
  const auto words = split_words(phrase);
  std::optional<std::string> sub;
  for (std::size_t len = words.size() > 0 ? words.size() - 1 : 0; len >= 1 && !sub; --len) {
    for (std::size_t start = 0; start + len <= words.size(); ++start) {
      std::string candidate;
      for (std::size_t i = start; i < start + len; ++i) {
        if (i > start) candidate += ' ';
        candidate += words[i];
      }
      if (lexicon_->signifies(candidate, action)) {
        sub = candidate;
        break;
      }
    }
  }
  std::vector<std::string> others;
  for (ActionKind k : lexicon_->actions_for(phrase)) {
    if (k != action) others.push_back(action_name(k));
  }
  if (sub) {
    v.near_misses.push_back(squote(phrase) + " itself does not suggest " + action_name(action) + ", but " +
                            squote(*sub) + " does");
  }
  if (!others.empty()) {
    v.near_misses.push_back(squote(phrase) + " does not suggest " + action_name(action) + ", but maybe " +
                            join(others, " or "));
  }
  if (v.near_misses.empty()) {
    v.near_misses.push_back(squote(phrase) + " does not suggest " + action_name(action));
  }
  return v;
}

OracleVerdict Oracles::is_anagram(std::string_view letters, std::string_view word) const {
  return cryptic::is_anagram(letters, word);
}

OracleVerdict Oracles::is_homophone(std::string_view phrase, std::string_view candidate) const {
  const auto a = normalize_letters(phrase);
  const auto b = normalize_letters(candidate);
  if (a == b) {
    return {false, {squote(phrase) + " and " + squote(candidate) + " are spelled the same, so not a homophone"}};
  }
  if (lexicon_->homophone_pair(a, b)) return {true, {}};
  const auto ka = phonetic_key(a);
  const auto kb = phonetic_key(b);
  if (ka == kb && !ka.empty()) return {true, {}};
  return {false,
          {squote(phrase) + " does not sound like " + squote(candidate) + " (phonetic keys " + ka + " and " + kb +
           ")"}};
}

OracleVerdict is_anagram(std::string_view letters, std::string_view word) {
  const auto a = normalize_letters(letters);
  const auto b = normalize_letters(word);
  std::array<int, 26> diff{};
  for (char c : a) --diff[c - 'A'];
  for (char c : b) ++diff[c - 'A'];
  const bool same_letters = std::all_of(diff.begin(), diff.end(), [](int d) { return d == 0; });
  if (same_letters && a != b) return {true, {}};
  if (same_letters) {
    return {false, {squote(letters) + " and " + squote(word) + " are identical, which is not an anagram"}};
  }
  std::string plus, minus;
  for (int i = 0; i < 26; ++i) {
    if (diff[i] > 0) plus.append(diff[i], static_cast<char>('A' + i));
    if (diff[i] < 0) minus.append(-diff[i], static_cast<char>('A' + i));
  }
  std::string delta;
  if (!plus.empty()) delta += "+" + plus;
  if (!minus.empty()) delta += (delta.empty() ? "-" : " -") + minus;
  return {false, {squote(word) + " cannot be formed from " + squote(letters) + " : letters differ by " + delta}};
}

namespace {
Oracles exact_oracles(const Lexicon& lex) {
  // Non-owning alias: the caller keeps the lexicon alive for the call.
  return Oracles(std::shared_ptr<const Lexicon>(std::shared_ptr<const Lexicon>{}, &lex));
}
}  // namespace

OracleVerdict is_synonym(const Lexicon& lex, std::string_view phrase, std::string_view candidate,
                         const std::optional<Pattern>& pattern) {
  return exact_oracles(lex).is_synonym(phrase, candidate, pattern);
}

OracleVerdict is_abbreviation(const Lexicon& lex, std::string_view phrase, std::string_view abbr) {
  return exact_oracles(lex).is_abbreviation(phrase, abbr);
}

OracleVerdict action_type(const Lexicon& lex, std::string_view phrase, ActionKind action) {
  return exact_oracles(lex).action_type(phrase, action);
}

OracleVerdict is_homophone(const Lexicon& lex, std::string_view phrase, std::string_view candidate) {
  return exact_oracles(lex).is_homophone(phrase, candidate);
}

}  // namespace cryptic
