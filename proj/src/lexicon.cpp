#include "cryptic/lexicon.hpp"

#include <algorithm>
#include <fstream>

namespace cryptic {

namespace {

template <typename OnLine>
void read_lines(const std::filesystem::path& path, OnLine&& on_line) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LexiconError("cannot open lexicon file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    on_line(line, number);
  }
}

std::pair<std::string, std::string> split_tab(const std::string& line,
                                              const std::filesystem::path& path,
                                              std::size_t number) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) {
    throw LexiconError(path.string() + ":" + std::to_string(number) + ": expected two tab-separated fields");
  }
  auto a = trim(line.substr(0, tab));
  auto b = trim(line.substr(tab + 1));
  if (a.empty() || b.empty()) {
    throw LexiconError(path.string() + ":" + std::to_string(number) + ": empty field");
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

std::string Lexicon::fold(std::string_view phrase) {
  std::string out;
  bool space = false;
  for (char c : trim(phrase)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void Lexicon::append_unique(Index& index, const std::string& key, std::string value) {
  auto& values = index[key];
  const std::string folded = fold(value);
  for (const auto& v : values) {
    if (fold(v) == folded) return;
  }
  values.push_back(std::move(value));
}

void Lexicon::add_abbreviation(std::string_view short_form, std::string_view phrase) {
  const std::string shorty = normalize_letters(short_form);
  if (shorty.empty()) throw LexiconError("abbreviation short form has no letters");
  append_unique(abbrev_forward_, fold(shorty), trim(phrase));
  append_unique(abbrev_inverse_, fold(phrase), shorty);
}

void Lexicon::add_synonym(std::string_view phrase, std::string_view candidate) {
  append_unique(thesaurus_, fold(phrase), trim(candidate));
}

void Lexicon::add_indicator(ActionKind action, std::string_view phrase) {
  indicators_[fold(phrase)].insert(action);
}

void Lexicon::add_homophone(std::string_view a, std::string_view b) {
  auto x = normalize_letters(a), y = normalize_letters(b);
  if (y < x) std::swap(x, y);
  homophones_.emplace(std::move(x), std::move(y));
}

void Lexicon::add_word(std::string_view word) {
  std::string w = trim(word);
  std::string key = normalize_letters(w);
  if (key.empty() || !word_set_.insert(key).second) return;
  words_.push_back(std::move(w));
}

void Lexicon::load_abbreviations(const std::filesystem::path& path) {
  read_lines(path, [&](const std::string& line, std::size_t n) {
    auto [s, p] = split_tab(line, path, n);
    add_abbreviation(s, p);
  });
}

void Lexicon::load_thesaurus(const std::filesystem::path& path) {
  read_lines(path, [&](const std::string& line, std::size_t n) {
    auto [p, c] = split_tab(line, path, n);
    add_synonym(p, c);
  });
}

void Lexicon::load_indicators(const std::filesystem::path& path) {
  read_lines(path, [&](const std::string& line, std::size_t n) {
    auto [a, w] = split_tab(line, path, n);
    auto action = parse_action(a);
    if (!action) {
      throw LexiconError(path.string() + ":" + std::to_string(n) + ": unknown action '" + a + "'");
    }
    add_indicator(*action, w);
  });
}

void Lexicon::load_homophones(const std::filesystem::path& path) {
  read_lines(path, [&](const std::string& line, std::size_t n) {
    auto [a, b] = split_tab(line, path, n);
    add_homophone(a, b);
  });
}

void Lexicon::load_wordlist(const std::filesystem::path& path) {
  read_lines(path, [&](const std::string& line, std::size_t) { add_word(line); });
}

Lexicon Lexicon::load_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw LexiconError("lexicon directory not found: " + dir.string());
  Lexicon lex;
  if (fs::exists(dir / "abbreviations.tsv")) lex.load_abbreviations(dir / "abbreviations.tsv");
  if (fs::exists(dir / "thesaurus.tsv")) lex.load_thesaurus(dir / "thesaurus.tsv");
  std::vector<fs::path> indicator_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("indicators", 0) == 0 && entry.path().extension() == ".tsv") {
      indicator_files.push_back(entry.path());
    }
  }
  std::sort(indicator_files.begin(), indicator_files.end());
  for (const auto& f : indicator_files) lex.load_indicators(f);
  if (fs::exists(dir / "homophones.tsv")) lex.load_homophones(dir / "homophones.tsv");
  if (fs::exists(dir / "wordlist.txt")) lex.load_wordlist(dir / "wordlist.txt");
  return lex;
}

std::vector<std::string> Lexicon::expansions(std::string_view short_form) const {
  auto it = abbrev_forward_.find(fold(normalize_letters(short_form)));
  return it == abbrev_forward_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> Lexicon::abbreviations_of(std::string_view phrase) const {
  auto it = abbrev_inverse_.find(fold(phrase));
  return it == abbrev_inverse_.end() ? std::vector<std::string>{} : it->second;
}

bool Lexicon::has_abbreviation(std::string_view phrase, std::string_view short_form) const {
  const auto target = normalize_letters(short_form);
  for (const auto& s : abbreviations_of(phrase)) {
    if (s == target) return true;
  }
  return false;
}

bool Lexicon::in_thesaurus(std::string_view phrase) const {
  return thesaurus_.count(fold(phrase)) > 0;
}

std::vector<std::string> Lexicon::synonyms_of(std::string_view phrase) const {
  auto it = thesaurus_.find(fold(phrase));
  return it == thesaurus_.end() ? std::vector<std::string>{} : it->second;
}

bool Lexicon::has_synonym(std::string_view phrase, std::string_view candidate) const {
  const auto target = normalize_letters(candidate);
  for (const auto& s : synonyms_of(phrase)) {
    if (normalize_letters(s) == target) return true;
  }
  return false;
}

bool Lexicon::signifies(std::string_view phrase, ActionKind action) const {
  auto it = indicators_.find(fold(phrase));
  return it != indicators_.end() && it->second.count(action) > 0;
}

std::vector<ActionKind> Lexicon::actions_for(std::string_view phrase) const {
  auto it = indicators_.find(fold(phrase));
  if (it == indicators_.end()) return {};
  std::vector<ActionKind> out;
  for (ActionKind k : kAllActions) {
    if (it->second.count(k)) out.push_back(k);
  }
  return out;
}

bool Lexicon::homophone_pair(std::string_view a, std::string_view b) const {
  auto x = normalize_letters(a), y = normalize_letters(b);
  if (y < x) std::swap(x, y);
  return homophones_.count({x, y}) > 0;
}

}  // namespace cryptic
