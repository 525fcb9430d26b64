#include "cryptic/notation.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

#include "cryptic/lexicon.hpp"

namespace cryptic {

using namespace node;

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string sorted_letters(std::string s) {
  std::sort(s.begin(), s.end());
  return s;
}

const std::vector<std::string> kOutsideKeywords = {"around", "about", "outside", "containing", "holding",
                                                    "round",  "embracing", "round"};
const std::vector<std::string> kInsideKeywords = {"in", "inside", "into", "within"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

enum class GlossKind { Plain, AnagramSig, ReversalSig, RemovalSig, OutsideSig, InsideSig, SpokenSig, ShortForm, Comment };

struct GlossPart {
  GlossKind kind;
  std::string text;
};

std::string strip_assignment(const std::string& text) {
  auto eq = text.find('=');
  return trim(eq == std::string::npos ? text : text.substr(0, eq));
}

bool fully_quoted(const std::string& t) {
  return t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\''));
}

GlossPart classify_part(const std::string& raw) {
  const std::string t = trim(raw);
  const std::string low = to_lower(t);
  if (t.empty()) return {GlossKind::Comment, t};
  if (t[0] == '*') return {GlossKind::AnagramSig, strip_assignment(t.substr(1))};
  if (t[0] == '<') return {GlossKind::ReversalSig, strip_assignment(t.substr(1))};
  if (t[0] == '-') return {GlossKind::RemovalSig, strip_assignment(t.substr(1))};
  if (fully_quoted(t)) return {GlossKind::SpokenSig, t.substr(1, t.size() - 2)};
  if (low == "short form" || low == "abbreviation" || low == "abbr" || low == "abbr." || low == "abbrev") {
    return {GlossKind::ShortForm, t};
  }
  if (low.rfind("from ", 0) == 0 || low.rfind("e.g.", 0) == 0 || low.rfind("see ", 0) == 0) {
    return {GlossKind::Comment, t};
  }
  if (t.find('(') != std::string::npos || t.find(')') != std::string::npos || t.find('"') != std::string::npos) {
    return {GlossKind::Comment, t};
  }
  if (auto eq = t.find('='); eq != std::string::npos) {
    const std::string lhs = trim(t.substr(0, eq));
    const std::string rhs = to_lower(t.substr(eq + 1));
    if (rhs.find("anagram") != std::string::npos) return {GlossKind::AnagramSig, lhs};
    if (rhs.find("revers") != std::string::npos) return {GlossKind::ReversalSig, lhs};
    if (rhs.find("remov") != std::string::npos || rhs.find("delet") != std::string::npos ||
        rhs.find("missing") != std::string::npos) {
      return {GlossKind::RemovalSig, lhs};
    }
    if (rhs.find("outside") != std::string::npos) return {GlossKind::OutsideSig, lhs};
    if (rhs.find("inside") != std::string::npos || rhs.find("insert") != std::string::npos) {
      return {GlossKind::InsideSig, lhs};
    }
    if (rhs.find("homophone") != std::string::npos || rhs.find("sound") != std::string::npos) {
      return {GlossKind::SpokenSig, lhs};
    }
    return {GlossKind::Comment, t};
  }
  return {GlossKind::Plain, t};
}

// Splits on commas outside quotes and nested parentheses.
std::vector<std::string> split_top_level(std::string_view content) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"') {
      quote = c;
    } else if (c == '\'' && (i == 0 || !is_alpha(content[i - 1]))) {
      quote = c;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
      continue;
    }
    cur.push_back(c);
  }
  parts.push_back(cur);
  return parts;
}

std::vector<GlossPart> classify_gloss(std::string_view content) {
  const std::string t = trim(content);
  const std::string low = to_lower(t);
  if (low.rfind("i.e.", 0) == 0 || low.rfind("ie ", 0) == 0) return {{GlossKind::Comment, t}};
  std::vector<GlossPart> parts;
  for (const auto& p : split_top_level(t)) parts.push_back(classify_part(p));
  return parts;
}

std::string reverse_copy(std::string s) {
  std::reverse(s.begin(), s.end());
  return s;
}

// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), end_(text.size()), options_(options) {}

  WordplayNode parse() {
    skip_ws();
    if (auto dd = try_double_definition()) return *dd;
    WordplayNode root = parse_sequence();
    skip_ws();
    if (pos_ != end_) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { fail_at(message, pos_); }
  [[noreturn]] void fail_at(const std::string& message, std::size_t at) const {
    throw ParseError(message, at, std::string(text_.substr(0, std::min(matched_, text_.size()))));
  }

  bool at_end() const { return pos_ >= end_; }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < end_ ? text_[pos_ + ahead] : '\0'; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void mark() { matched_ = std::max(matched_, pos_); }

  std::optional<WordplayNode> try_double_definition() {
    std::string rest = to_lower(trim(text_.substr(pos_, end_ - pos_)));
    std::string letters;
    if (auto eq = rest.find('='); eq != std::string::npos) {
      letters = normalize_letters(rest.substr(eq + 1));
      rest = trim(rest.substr(0, eq));
    }
    if (rest == "dd" || rest == "(dd)" || rest == "double definition" || rest == "double definition (dd)" ||
        rest == "double def") {
      pos_ = end_;
      mark();
      return WordplayNode(DoubleDefinition{letters});
    }
    return std::nullopt;
  }

  // Index one past the ')' matching the '(' at pos_.
  std::size_t find_close(std::size_t open) const {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = open; i < end_; ++i) {
      const char c = text_[i];
      if (quote) {
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '"') {
        quote = c;
      } else if (c == '(') {
        ++depth;
      } else if (c == ')') {
        if (--depth == 0) return i + 1;
      }
    }
    fail_at("unbalanced '('", open);
  }

  WordplayNode parse_range(std::size_t begin, std::size_t stop) {
    const std::size_t saved_end = end_;
    auto saved_pending = std::move(pending_);
    pending_.clear();
    pos_ = begin;
    end_ = stop;
    skip_ws();
    if (at_end()) fail("empty group");
    WordplayNode node = parse_sequence();
    skip_ws();
    if (!at_end()) fail("unexpected '" + std::string(1, text_[pos_]) + "' in group");
    end_ = saved_end;
    pending_ = std::move(saved_pending);
    return node;
  }

  bool starts_item() const {
    const char c = peek();
    return is_upper(c) || c == '[' || c == '(' || c == '"' || c == '\'';
  }

  WordplayNode parse_sequence() {
    std::vector<WordplayNode> parts;
    parts.push_back(parse_item());
    while (true) {
      skip_ws();
      if (at_end()) break;
      if (peek() == '+') {
        ++pos_;
        skip_ws();
        if (at_end() || !starts_item()) fail("expected a part after '+'");
        parts.push_back(parse_item());
        continue;
      }
      if (starts_item()) {
        parts.push_back(parse_item());
        continue;
      }
      if (is_lower(peek())) fail("unexpected word '" + peek_word() + "'");
      break;
    }
    if (parts.size() == 1) return std::move(parts.front());
    return WordplayNode(Sequence{std::move(parts)});
  }

  std::string peek_word() const {
    std::size_t i = pos_;
    while (i < end_ && is_alpha(text_[i])) ++i;
    return std::string(text_.substr(pos_, i - pos_));
  }

  void consume_word(const std::string& w) { pos_ += w.size(); }

  bool word_boundary_after(const std::string& w) const {
    const std::size_t i = pos_ + w.size();
    return i >= end_ || !is_alpha(text_[i]);
  }

  int parse_split_marker() {
    if (peek() != '@') return 0;
    const std::size_t at = pos_;
    ++pos_;
    std::string digits;
    while (std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(text_[pos_++]);
    if (digits.empty() || digits.size() > 4) fail_at("expected a number after '@'", at);
    return std::stoi(digits);
  }

  // Indicator text from glosses after a container keyword.
  std::string parse_container_glosses() {
    std::string indicator;
    while (true) {
      skip_ws();
      if (peek() != '(') break;
      const std::size_t close = find_close(pos_);
      const std::string content(text_.substr(pos_ + 1, close - pos_ - 2));
      const char first = trim(content).empty() ? ' ' : trim(content)[0];
      if (is_upper(first) || first == '[' || first == '(' || first == '"') break;  // an operand
      pos_ = close;
      mark();
      for (const auto& part : classify_gloss(content)) {
        if (part.kind == GlossKind::Comment || part.kind == GlossKind::ShortForm) continue;
        if (indicator.empty()) indicator = part.text;
      }
    }
    return indicator;
  }

  WordplayNode make_container(WordplayNode outer, WordplayNode inner, std::string indicator, int split,
                              Placement placement, std::size_t at) {
    if (split != 0) {
      const auto lo = known_length(outer);
      if (lo && (split < 1 || static_cast<std::size_t>(split) >= *lo)) {
        fail_at("insertion point @" + std::to_string(split) + " is not inside the outer letters", at);
      }
    }
    if (indicator.empty() && !pending_.empty()) {
      indicator = pending_.front();
      pending_.pop_front();
    }
    return WordplayNode(Container{std::move(outer), std::move(inner), std::move(indicator), split, placement});
  }

  WordplayNode parse_item() {
    WordplayNode node = parse_primary();
    while (true) {
      skip_ws();
      if (!is_lower(peek())) break;
      const std::size_t at = pos_;
      const std::string w = to_lower(peek_word());
      if (!word_boundary_after(w) && peek(w.size()) != '@') break;
      if (contains(kOutsideKeywords, w)) {
        consume_word(w);
        const int split = parse_split_marker();
        std::string ind = parse_container_glosses();
        if (ind.empty()) ind = w;
        skip_ws();
        WordplayNode inner = parse_primary();
        node = make_container(std::move(node), std::move(inner), ind, split, Placement::Outside, at);
      } else if (contains(kInsideKeywords, w)) {
        consume_word(w);
        const int split = parse_split_marker();
        std::string ind = parse_container_glosses();
        if (ind.empty()) ind = w;
        skip_ws();
        WordplayNode outer = parse_primary();
        node = make_container(std::move(outer), std::move(node), ind, split, Placement::Inside, at);
      } else if (w == "with") {
        consume_word(w);
        skip_ws();
        WordplayNode outer = parse_primary();
        skip_ws();
        const std::string kw = to_lower(peek_word());
        if (!contains(kOutsideKeywords, kw)) fail("expected 'around' after 'with ...'");
        consume_word(kw);
        const int split = parse_split_marker();
        skip_ws();
        if (to_lower(peek_word()) == "it") consume_word("it");
        std::string ind = parse_container_glosses();
        if (ind.empty()) ind = kw;
        node = make_container(std::move(outer), std::move(node), ind, split, Placement::Outside, at);
      } else if (w == "of" && pending_container_) {
        consume_word(w);
        auto [ind, placement] = *pending_container_;
        pending_container_.reset();
        skip_ws();
        WordplayNode other = parse_primary();
        if (placement == Placement::Outside) {
          node = make_container(std::move(node), std::move(other), ind, 0, placement, at);
        } else {
          node = make_container(std::move(other), std::move(node), ind, 0, placement, at);
        }
      } else {
        break;
      }
      mark();
    }
    parse_result_marker(node);
    return node;
  }

  // Optional "= LETTERS" giving the letters a construct yields.
  void parse_result_marker(WordplayNode& node) {
    skip_ws();
    if (peek() != '=') return;
    const std::size_t at = pos_;
    ++pos_;
    skip_ws();
    std::string letters;
    while (is_upper(peek()) || (peek() == ' ' && is_upper(peek(1)))) {
      if (peek() != ' ') letters.push_back(peek());
      ++pos_;
    }
    if (letters.empty()) fail("expected capital letters after '='");
    if (!resolve_against(node, letters)) fail_at("construct cannot produce '" + letters + "'", at);
    mark();
  }

  WordplayNode parse_primary() {
    skip_ws();
    const std::size_t start = pos_;
    const char c = peek();
    WordplayNode node;
    if (c == '(') {
      const std::size_t close = find_close(pos_);
      const std::size_t content_begin = pos_ + 1;
      const std::size_t content_end = close - 1;
      const std::string content(text_.substr(content_begin, content_end - content_begin));
      const char after = close < end_ ? text_[close] : '\0';
      if (after == '*' || after == '<') {
        WordplayNode fodder = parse_fodder(content, content_begin, content_end);
        pos_ = close + 1;
        if (after == '*') {
          node = Anagram{std::move(fodder), "", ""};
        } else {
          node = Reversal{std::move(fodder), ""};
        }
      } else {
        const std::string t = trim(content);
        const char first = t.empty() ? ' ' : t[0];
        if (!(is_upper(first) || first == '[' || first == '(' || first == '"')) {
          fail("expected wordplay, found gloss '(" + content + ")'");
        }
        node = parse_range(content_begin, content_end);
        pos_ = close;
      }
    } else if (c == '"' || c == '\'') {
      const std::size_t close = text_.find(c, pos_ + 1);
      if (close == std::string_view::npos || close >= end_) fail("unterminated quote");
      const std::string spoken(text_.substr(pos_ + 1, close - pos_ - 1));
      if (normalize_letters(spoken).empty()) fail("empty spoken word");
      pos_ = close + 1;
      node = Homophone{spoken, "", "", ""};
    } else if (is_upper(c) || c == '[') {
      node = parse_caps_group();
    } else if (at_end()) {
      fail("unexpected end of wordplay");
    } else {
      fail("unexpected '" + std::string(1, c) + "'");
    }
    mark();
    apply_glosses(node, start);
    parse_result_marker(node);
    return node;
  }

  WordplayNode parse_fodder(const std::string& content, std::size_t begin, std::size_t stop) {
    const bool letters_only = std::all_of(content.begin(), content.end(), [](char ch) {
      return is_alpha(ch) || std::isspace(static_cast<unsigned char>(ch));
    });
    if (letters_only) {
      const std::string letters = normalize_letters(content);
      if (letters.empty()) fail_at("empty anagram or reversal fodder", begin);
      return WordplayNode(Literal{letters});
    }
    const std::size_t saved = pos_;
    WordplayNode node = parse_range(begin, stop);
    pos_ = saved;
    return node;
  }

  struct CapsWord {
    std::vector<std::pair<std::string, bool>> pieces;  // (text, bracketed)
  };

  bool at_caps_word() const {
    const char c = peek();
    return is_upper(c) || c == '[';
  }

  CapsWord read_caps_word() {
    CapsWord word;
    while (!at_end()) {
      const char c = peek();
      if (c == '[') {
        const std::size_t close = text_.find(']', pos_);
        if (close == std::string_view::npos || close >= end_) fail("unclosed '['");
        const std::string inside(text_.substr(pos_ + 1, close - pos_ - 1));
        if (inside.empty() || !std::all_of(inside.begin(), inside.end(), is_alpha)) {
          fail("brackets must hold removed letters");
        }
        word.pieces.emplace_back(inside, true);
        pos_ = close + 1;
      } else if (is_upper(c)) {
        std::string run;
        while (is_upper(peek())) run.push_back(text_[pos_++]);
        word.pieces.emplace_back(run, false);
      } else if (is_lower(c)) {
        fail("lowercase letters outside brackets in '" + peek_word() + "'");
      } else {
        break;
      }
    }
    return word;
  }

  WordplayNode parse_caps_group() {
    std::vector<CapsWord> words;
    words.push_back(read_caps_word());
    while (peek() == ' ') {
      std::size_t i = pos_;
      while (i < end_ && text_[i] == ' ') ++i;
      if (i < end_ && (is_upper(text_[i]) || text_[i] == '[')) {
        pos_ = i;
        words.push_back(read_caps_word());
      } else {
        break;
      }
    }

    auto bracket_count = [](const CapsWord& w) {
      return std::count_if(w.pieces.begin(), w.pieces.end(), [](const auto& p) { return p.second; });
    };
    std::size_t total_brackets = 0;
    for (const auto& w : words) total_brackets += bracket_count(w);

    if (total_brackets == 0) {
      std::string letters;
      for (const auto& w : words) letters += w.pieces.front().first;
      return WordplayNode(Literal{letters});
    }

    if (words.size() >= 2) {
      const bool initials_shape = std::all_of(words.begin(), words.end(), [](const CapsWord& w) {
        if (w.pieces.empty() || w.pieces[0].second || w.pieces[0].first.size() != 1) return false;
        return w.pieces.size() == 1 || (w.pieces.size() == 2 && w.pieces[1].second);
      });
      if (initials_shape) {
        Initials init;
        for (const auto& w : words) {
          std::string phrase = to_lower(w.pieces[0].first);
          if (w.pieces.size() == 2) phrase += to_lower(w.pieces[1].first);
          init.phrases.push_back(phrase);
        }
        return WordplayNode(std::move(init));
      }
    }

    if (words.size() == 1 && bracket_count(words[0]) == 1 &&
        !(words[0].pieces.size() == 1)) {
      const auto& pieces = words[0].pieces;
      Deletion del;
      std::string source;
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (pieces[i].second) {
          del.removed = upper(pieces[i].first);
          del.offset = source.size();
          del.kind = i == 0 ? DeletionKind::First : (i + 1 == pieces.size() ? DeletionKind::Last : DeletionKind::Inner);
        }
        source += upper(pieces[i].first);
      }
      del.source = WordplayNode(Literal{source});
      return WordplayNode(std::move(del));
    }

    // Hidden word: brackets only at the outer edges of the group.
    Hidden hidden;
    std::vector<std::string> host_words;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      const auto& pieces = words[wi].pieces;
      std::string host_word;
      for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
        const bool leading_edge = wi == 0 && pi == 0;
        const bool trailing_edge = wi + 1 == words.size() && pi + 1 == pieces.size();
        if (pieces[pi].second && !leading_edge && !trailing_edge) {
          fail("hidden word may only bracket the first and last letters");
        }
        if (!pieces[pi].second) hidden.letters += pieces[pi].first;
        host_word += to_lower(pieces[pi].first);
      }
      host_words.push_back(host_word);
    }
    if (hidden.letters.empty()) fail("hidden word has no capital letters");
    for (std::size_t i = 0; i < host_words.size(); ++i) {
      if (i > 0) hidden.host_text += ' ';
      hidden.host_text += host_words[i];
    }
    return WordplayNode(std::move(hidden));
  }

  bool lexicon_indicator(const std::string& text) const {
    return options_.lexicon && options_.lexicon->is_indicator(text);
  }

  std::vector<GlossPart> read_glosses(const WordplayNode& node) {
    std::vector<GlossPart> parts;
    while (true) {
      skip_ws();
      if (peek() == '(') {
        const std::size_t close = find_close(pos_);
        const std::string content(text_.substr(pos_ + 1, close - pos_ - 2));
        const std::string t = trim(content);
        const char first = t.empty() ? ' ' : t[0];
        // A parenthesised group starting with capitals is the next operand.
        if (is_upper(first) || first == '[' || first == '(') {
          if (close < end_ && (text_[close] == '*' || text_[close] == '<')) break;
          if (t.find_first_of("+[") != std::string::npos || t == upper(t)) break;
        }
        for (const auto& part : split_top_level(t)) {
          const std::string pt = trim(part);
          std::size_t caps = 0;
          while (caps < pt.size() && is_upper(pt[caps])) ++caps;
          if (caps > 0 && trim(pt.substr(caps)).rfind('(', 0) == 0) {
            fail("wordplay nested inside a gloss: '" + pt + "'");
          }
        }
        pos_ = close;
        mark();
        for (auto& p : classify_gloss(content)) parts.push_back(std::move(p));
      } else if (peek() == '-' && (peek(1) == ' ' || peek(1) == '\'' || peek(1) == '"')) {
        // "- 'C'" names the letters a deletion removes.
        const std::size_t at = pos_;
        ++pos_;
        skip_ws();
        std::string named;
        if (peek() == '\'' || peek() == '"') {
          const char q = peek();
          const std::size_t close = text_.find(q, pos_ + 1);
          if (close == std::string_view::npos || close >= end_) fail("unterminated quote");
          named = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
          pos_ = close + 1;
        } else {
          while (is_upper(peek())) named.push_back(text_[pos_++]);
        }
        const auto* del = node.as<Deletion>();
        if (!del) fail_at("'-' only follows a deletion", at);
        if (normalize_letters(named) != del->removed) {
          fail_at("deletion removes '" + del->removed + "', not '" + named + "'", at);
        }
        mark();
      } else {
        break;
      }
    }
    return parts;
  }

  static bool sig_matches(GlossKind kind, const WordplayNode& node) {
    if (node.as<Anagram>()) return kind == GlossKind::AnagramSig;
    if (node.as<Reversal>()) return kind == GlossKind::ReversalSig;
    if (node.as<Deletion>()) return kind == GlossKind::RemovalSig;
    if (node.as<Homophone>()) return kind == GlossKind::SpokenSig;
    if (node.as<Hidden>() || node.as<Initials>()) {
      return kind == GlossKind::RemovalSig || kind == GlossKind::SpokenSig;
    }
    return false;
  }

  static bool is_sig(GlossKind kind) {
    return kind == GlossKind::AnagramSig || kind == GlossKind::ReversalSig || kind == GlossKind::RemovalSig ||
           kind == GlossKind::SpokenSig;
  }

  static std::string* indicator_slot(WordplayNode& node) {
    if (auto* n = node.as<Anagram>()) return &n->indicator;
    if (auto* n = node.as<Reversal>()) return &n->indicator;
    if (auto* n = node.as<Deletion>()) return &n->indicator;
    if (auto* n = node.as<Initials>()) return &n->indicator;
    if (auto* n = node.as<Hidden>()) return &n->indicator;
    if (auto* n = node.as<Homophone>()) return &n->indicator;
    return nullptr;
  }

  // The leaf that takes an origin phrase, if any.
  static WordplayNode* origin_target(WordplayNode& node) {
    if (node.as<Literal>()) return &node;
    if (auto* n = node.as<Anagram>()) return n->source->as<Literal>() ? &*n->source : nullptr;
    if (auto* n = node.as<Reversal>()) return n->source->as<Literal>() ? &*n->source : nullptr;
    if (auto* n = node.as<Deletion>()) return n->source->as<Literal>() ? &*n->source : nullptr;
    return nullptr;
  }

  void apply_glosses(WordplayNode& node, std::size_t start) {
    (void)start;
    std::vector<GlossPart> parts = read_glosses(node);
    std::string* indicator = indicator_slot(node);
    auto* homophone = node.as<Homophone>();
    WordplayNode* leaf = origin_target(node);
    const bool takes_origin = leaf != nullptr || homophone != nullptr;
    std::optional<std::string> origin;
    bool short_form = false;
    std::vector<const GlossPart*> plains;

    for (const auto& part : parts) {
      if (part.kind == GlossKind::ShortForm) {
        short_form = true;
      } else if (part.kind == GlossKind::OutsideSig || part.kind == GlossKind::InsideSig) {
        pending_container_ = {part.text, part.kind == GlossKind::OutsideSig ? Placement::Outside : Placement::Inside};
      } else if (is_sig(part.kind)) {
        if (indicator && indicator->empty() && sig_matches(part.kind, node)) {
          *indicator = part.text;
        } else {
          pending_.push_back(part.text);
        }
      } else if (part.kind == GlossKind::Plain) {
        plains.push_back(&part);
      }
    }

    std::vector<const GlossPart*> rest;
    for (const auto* p : plains) {
      if (lexicon_indicator(p->text) && !(takes_origin && !origin && !indicator)) {
        if (indicator && indicator->empty()) {
          *indicator = p->text;
        } else {
          pending_.push_back(p->text);
        }
      } else {
        rest.push_back(p);
      }
    }
    if (indicator && indicator->empty() && !pending_.empty() && !rest.empty()) {
      *indicator = pending_.front();
      pending_.pop_front();
    }
    for (const auto* p : rest) {
      if (takes_origin && !origin) {
        origin = p->text;
      } else if (indicator && indicator->empty()) {
        *indicator = p->text;
      }
    }
    if (indicator && indicator->empty() && !pending_.empty()) {
      *indicator = pending_.front();
      pending_.pop_front();
    }

    if (homophone && origin) homophone->origin = *origin;
    if (leaf && origin) {
      const std::string letters = leaf->as<Literal>()->letters;
      const bool abbrev = short_form || (letters.size() <= 3 && options_.lexicon &&
                                         options_.lexicon->has_abbreviation(*origin, letters));
      if (abbrev) {
        *leaf = AbbrevOf{*origin, letters};
      } else {
        *leaf = SynonymOf{*origin, letters};
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t end_;
  std::size_t matched_ = 0;
  const ParseOptions& options_;
  std::deque<std::string> pending_;
  std::optional<std::pair<std::string, Placement>> pending_container_;
};

void finalize(WordplayNode& n, std::string_view text) {
  auto fail = [&](const std::string& msg) { throw ParseError(msg, text.size(), std::string(text)); };
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Anagram> || std::is_same_v<T, Reversal> || std::is_same_v<T, Deletion>) {
          finalize(*v.source, text);
        } else if constexpr (std::is_same_v<T, Container>) {
          finalize(*v.outer, text);
          finalize(*v.inner, text);
          const auto lo = surface_letters(*v.outer).size();
          if (v.outer_split == 0) {
            if (lo == 2) {
              v.outer_split = 1;
            } else {
              fail("insertion point into '" + surface_letters(*v.outer) +
                   "' is ambiguous; give the answer or an explicit '@N'");
            }
          }
          if (v.outer_split < 1 || static_cast<std::size_t>(v.outer_split) >= lo) {
            fail("insertion point @" + std::to_string(v.outer_split) + " is not inside '" +
                 surface_letters(*v.outer) + "'");
          }
        } else if constexpr (std::is_same_v<T, Homophone>) {
          if (v.letters.empty()) {
            fail("spelling of homophone \"" + v.sounds_like + "\" is unknown; add '= LETTERS' or give the answer");
          }
        } else if constexpr (std::is_same_v<T, Sequence>) {
          for (auto& p : v.parts) finalize(p, text);
        }
      },
      n.value);
}

}  // namespace

WordplayNode parse_wordplay(std::string_view annotation, const ParseOptions& options) {
  if (trim(annotation).empty()) throw ParseError("empty wordplay", 0, "");
  Parser parser(annotation, options);
  WordplayNode root = parser.parse();
  if (options.answer) {
    WordplayNode attempt = root;
    if (resolve_against(attempt, normalize_letters(*options.answer))) root = std::move(attempt);
  }
  finalize(root, annotation);
  return root;
}

std::optional<std::size_t> known_length(const WordplayNode& n) {
  return std::visit(
      [](const auto& v) -> std::optional<std::size_t> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal> || std::is_same_v<T, SynonymOf> || std::is_same_v<T, AbbrevOf> ||
                      std::is_same_v<T, Hidden>) {
          return v.letters.size();
        } else if constexpr (std::is_same_v<T, Anagram> || std::is_same_v<T, Reversal>) {
          return known_length(*v.source);
        } else if constexpr (std::is_same_v<T, Deletion>) {
          auto s = known_length(*v.source);
          if (!s || *s < v.removed.size()) return std::nullopt;
          return *s - v.removed.size();
        } else if constexpr (std::is_same_v<T, Initials>) {
          return v.phrases.size();
        } else if constexpr (std::is_same_v<T, Container>) {
          auto a = known_length(*v.outer), b = known_length(*v.inner);
          if (!a || !b) return std::nullopt;
          return *a + *b;
        } else if constexpr (std::is_same_v<T, Homophone> || std::is_same_v<T, DoubleDefinition>) {
          if (v.letters.empty()) return std::nullopt;
          return v.letters.size();
        } else {
          std::size_t total = 0;
          for (const auto& p : v.parts) {
            auto l = known_length(p);
            if (!l) return std::nullopt;
            total += *l;
          }
          return total;
        }
      },
      n.value);
}

bool resolve_against(WordplayNode& n, std::string_view letters_view) {
  const std::string letters(letters_view);
  return std::visit(
      [&](auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Anagram>) {
          const std::string src = surface_letters(*v.source);
          if (!v.result.empty()) return v.result == letters;
          if (src.size() != letters.size() || sorted_letters(src) != sorted_letters(letters)) return false;
          v.result = letters;
          return true;
        } else if constexpr (std::is_same_v<T, Reversal>) {
          WordplayNode copy = *v.source;
          if (!resolve_against(copy, reverse_copy(letters))) return false;
          *v.source = std::move(copy);
          return true;
        } else if constexpr (std::is_same_v<T, Container>) {
          auto lo = known_length(*v.outer);
          auto li = known_length(*v.inner);
          if (!lo && li && letters.size() > *li) lo = letters.size() - *li;
          if (!li && lo && letters.size() > *lo) li = letters.size() - *lo;
          if (!lo || !li || *lo + *li != letters.size() || *lo < 2) return false;
          auto try_split = [&](std::size_t s) {
            WordplayNode outer = *v.outer, inner = *v.inner;
            const std::string outer_seg = letters.substr(0, s) + letters.substr(s + *li);
            if (!resolve_against(outer, outer_seg) || !resolve_against(inner, letters.substr(s, *li))) return false;
            *v.outer = std::move(outer);
            *v.inner = std::move(inner);
            v.outer_split = static_cast<int>(s);
            return true;
          };
          if (v.outer_split != 0) return try_split(static_cast<std::size_t>(v.outer_split));
          for (std::size_t s = 1; s < *lo; ++s) {
            if (try_split(s)) return true;
          }
          return false;
        } else if constexpr (std::is_same_v<T, Homophone> || std::is_same_v<T, DoubleDefinition>) {
          if (!v.letters.empty()) return v.letters == letters;
          if (letters.empty()) return false;
          v.letters = letters;
          return true;
        } else if constexpr (std::is_same_v<T, Sequence>) {
          std::vector<std::optional<std::size_t>> lengths;
          std::size_t known = 0, unknown = 0;
          for (const auto& p : v.parts) {
            lengths.push_back(known_length(p));
            if (lengths.back()) {
              known += *lengths.back();
            } else {
              ++unknown;
            }
          }
          if (unknown > 1 || known > letters.size()) return false;
          if (unknown == 0 && known != letters.size()) return false;
          if (unknown == 1 && known == letters.size()) return false;
          std::vector<WordplayNode> parts = v.parts;
          std::size_t offset = 0;
          for (std::size_t i = 0; i < parts.size(); ++i) {
            const std::size_t len = lengths[i] ? *lengths[i] : letters.size() - known;
            if (!resolve_against(parts[i], letters.substr(offset, len))) return false;
            offset += len;
          }
          v.parts = std::move(parts);
          return true;
        } else {
          return surface_letters(n) == letters;
        }
      },
      n.value);
}

std::string surface_letters(const WordplayNode& n) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal> || std::is_same_v<T, SynonymOf> || std::is_same_v<T, AbbrevOf> ||
                      std::is_same_v<T, Hidden> || std::is_same_v<T, Homophone> ||
                      std::is_same_v<T, DoubleDefinition>) {
          return v.letters;
        } else if constexpr (std::is_same_v<T, Anagram>) {
          return v.result.empty() ? surface_letters(*v.source) : v.result;
        } else if constexpr (std::is_same_v<T, Reversal>) {
          return reverse_copy(surface_letters(*v.source));
        } else if constexpr (std::is_same_v<T, Deletion>) {
          std::string s = surface_letters(*v.source);
          if (v.offset <= s.size()) s.erase(v.offset, v.removed.size());
          return s;
        } else if constexpr (std::is_same_v<T, Initials>) {
          std::string out;
          for (const auto& p : v.phrases) {
            const auto l = normalize_letters(p);
            if (!l.empty()) out.push_back(l[0]);
          }
          return out;
        } else if constexpr (std::is_same_v<T, Container>) {
          const std::string outer = surface_letters(*v.outer);
          const std::size_t s = std::min<std::size_t>(static_cast<std::size_t>(std::max(v.outer_split, 0)), outer.size());
          return outer.substr(0, s) + surface_letters(*v.inner) + outer.substr(s);
        } else {
          std::string out;
          for (const auto& p : v.parts) out += surface_letters(p);
          return out;
        }
      },
      n.value);
}

namespace {

// "(phrase, " prefix for glosses that carry a leaf origin.
std::string origin_prefix(const WordplayNode& leaf) {
  if (auto* s = leaf.as<SynonymOf>()) return s->phrase + ", ";
  if (auto* a = leaf.as<AbbrevOf>()) return a->phrase + ", short form, ";
  return "";
}

std::string origin_gloss(const WordplayNode& leaf) {
  if (auto* s = leaf.as<SynonymOf>()) return " (" + s->phrase + ")";
  if (auto* a = leaf.as<AbbrevOf>()) return " (" + a->phrase + ", short form)";
  return "";
}

bool is_leaf(const WordplayNode& n) { return n.as<Literal>() || n.as<SynonymOf>() || n.as<AbbrevOf>(); }

std::string render_operand(const WordplayNode& n) {
  std::string r = render_wordplay(n);
  if (n.as<Sequence>() || n.as<Container>()) return "(" + r + ")";
  return r;
}

std::string render_fodder_action(const WordplayNode& source, char sig, const std::string& indicator) {
  std::string out = "(";
  if (is_leaf(source)) {
    out += surface_letters(source);
  } else {
    out += render_wordplay(source);
  }
  out += ")";
  out.push_back(sig);
  std::string gloss = is_leaf(source) ? origin_prefix(source) : "";
  if (!indicator.empty()) {
    gloss += std::string(1, sig) + indicator;
  } else if (!gloss.empty()) {
    gloss.resize(gloss.size() - 2);
  }
  if (!gloss.empty()) out += " (" + gloss + ")";
  return out;
}

}  // namespace

std::string render_wordplay(const WordplayNode& n) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return v.letters;
        } else if constexpr (std::is_same_v<T, SynonymOf> || std::is_same_v<T, AbbrevOf>) {
          return v.letters + origin_gloss(n);
        } else if constexpr (std::is_same_v<T, Anagram>) {
          std::string out = render_fodder_action(*v.source, '*', v.indicator);
          if (!v.result.empty()) out += " = " + v.result;
          return out;
        } else if constexpr (std::is_same_v<T, Reversal>) {
          return render_fodder_action(*v.source, '<', v.indicator);
        } else if constexpr (std::is_same_v<T, Deletion>) {
          std::string letters = surface_letters(*v.source);
          std::string word = letters.substr(0, v.offset) + "[" + to_lower(v.removed) + "]" +
                             letters.substr(std::min(letters.size(), v.offset + v.removed.size()));
          word += origin_gloss(*v.source);
          if (!v.indicator.empty()) word += " (-" + v.indicator + ")";
          return word;
        } else if constexpr (std::is_same_v<T, Initials>) {
          std::string out;
          for (std::size_t i = 0; i < v.phrases.size(); ++i) {
            if (i > 0) out += ' ';
            const std::string p = to_lower(v.phrases[i]);
            out += upper(p.substr(0, 1));
            if (p.size() > 1) out += "[" + p.substr(1) + "]";
          }
          if (!v.indicator.empty()) out += " (" + v.indicator + ")";
          return out;
        } else if constexpr (std::is_same_v<T, Hidden>) {
          const auto words = split_words(v.host_text);
          std::string joined;
          for (const auto& w : words) joined += upper(w);
          const std::size_t start = joined.find(v.letters);
          const std::size_t stop = start == std::string::npos ? 0 : start + v.letters.size();
          std::string out;
          std::size_t offset = 0;
          for (std::size_t wi = 0; wi < words.size(); ++wi) {
            if (wi > 0) out += ' ';
            const std::string& w = words[wi];
            for (std::size_t i = 0; i < w.size();) {
              const std::size_t g = offset + i;
              const bool inside = g >= start && g < stop;
              std::size_t j = i;
              while (j < w.size() && ((offset + j >= start && offset + j < stop) == inside)) ++j;
              const std::string piece = w.substr(i, j - i);
              out += inside ? upper(piece) : "[" + piece + "]";
              i = j;
            }
            offset += w.size();
          }
          if (!v.indicator.empty()) out += " (" + v.indicator + ")";
          return out;
        } else if constexpr (std::is_same_v<T, Container>) {
          const std::string gloss = v.indicator.empty() ? "" : " (" + v.indicator + ")";
          const std::string split = "@" + std::to_string(v.outer_split);
          if (v.placement == Placement::Outside) {
            return render_operand(*v.outer) + " around" + split + gloss + " " + render_operand(*v.inner);
          }
          return render_operand(*v.inner) + " in" + split + gloss + " " + render_operand(*v.outer);
        } else if constexpr (std::is_same_v<T, Homophone>) {
          std::string out = "\"" + v.sounds_like + "\"";
          std::string gloss = v.origin;
          if (!v.indicator.empty()) gloss += (gloss.empty() ? "" : ", ") + ("\"" + v.indicator + "\"");
          if (!gloss.empty()) out += " (" + gloss + ")";
          if (!v.letters.empty()) out += " = " + v.letters;
          return out;
        } else if constexpr (std::is_same_v<T, DoubleDefinition>) {
          return v.letters.empty() ? "DD" : "DD = " + v.letters;
        } else {
          std::string out;
          for (std::size_t i = 0; i < v.parts.size(); ++i) {
            if (i > 0) out += " + ";
            const auto& p = v.parts[i];
            out += p.template as<Sequence>() ? "(" + render_wordplay(p) + ")" : render_wordplay(p);
          }
          return out;
        }
      },
      n.value);
}

namespace {

void describe_into(const WordplayNode& n, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += pad + "Literal " + v.letters + "\n";
        } else if constexpr (std::is_same_v<T, SynonymOf>) {
          out += pad + "SynonymOf \"" + v.phrase + "\" -> " + v.letters + "\n";
        } else if constexpr (std::is_same_v<T, AbbrevOf>) {
          out += pad + "AbbrevOf \"" + v.phrase + "\" -> " + v.letters + "\n";
        } else if constexpr (std::is_same_v<T, Anagram>) {
          out += pad + "Anagram [" + v.indicator + "]" + (v.result.empty() ? "" : " -> " + v.result) + "\n";
          describe_into(*v.source, depth + 1, out);
        } else if constexpr (std::is_same_v<T, Reversal>) {
          out += pad + "Reversal [" + v.indicator + "]\n";
          describe_into(*v.source, depth + 1, out);
        } else if constexpr (std::is_same_v<T, Deletion>) {
          const char* kind = v.kind == DeletionKind::First ? "first" : v.kind == DeletionKind::Last ? "last" : "inner";
          out += pad + "Deletion " + std::string(kind) + " -" + v.removed + " [" + v.indicator + "]\n";
          describe_into(*v.source, depth + 1, out);
        } else if constexpr (std::is_same_v<T, Initials>) {
          out += pad + "Initials [" + v.indicator + "] of";
          for (const auto& p : v.phrases) out += " " + p;
          out += "\n";
        } else if constexpr (std::is_same_v<T, Hidden>) {
          out += pad + "Hidden " + v.letters + " in \"" + v.host_text + "\" [" + v.indicator + "]\n";
        } else if constexpr (std::is_same_v<T, Container>) {
          out += pad + "Container @" + std::to_string(v.outer_split) + " [" + v.indicator + "]\n";
          out += pad + "  outer:\n";
          describe_into(*v.outer, depth + 2, out);
          out += pad + "  inner:\n";
          describe_into(*v.inner, depth + 2, out);
        } else if constexpr (std::is_same_v<T, Homophone>) {
          out += pad + "Homophone \"" + v.sounds_like + "\" -> " + v.letters + " [" + v.indicator + "]\n";
        } else if constexpr (std::is_same_v<T, DoubleDefinition>) {
          out += pad + "DoubleDefinition" + (v.letters.empty() ? "" : " " + v.letters) + "\n";
        } else {
          out += pad + "Sequence\n";
          for (const auto& p : v.parts) describe_into(p, depth + 1, out);
        }
      },
      n.value);
}

}  // namespace

std::string describe(const WordplayNode& node) {
  std::string out;
  describe_into(node, 0, out);
  return out;
}

}  // namespace cryptic
