#include "cryptic/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace cryptic {

namespace {

constexpr std::pair<Builtin, std::string_view> kBuiltins[] = {
    {Builtin::Reverse, "reverse"},         {Builtin::DropFirst, "drop_first"},
    {Builtin::DropLast, "drop_last"},      {Builtin::First, "first"},
    {Builtin::Last, "last"},               {Builtin::Initials, "initials"},
    {Builtin::OddLetters, "odd_letters"},  {Builtin::EvenLetters, "even_letters"},
    {Builtin::HiddenSpan, "hidden_span"},
};

constexpr std::pair<Predicate, std::string_view> kPredicates[] = {
    {Predicate::IsSynonym, "is_synonym"},     {Predicate::IsAbbreviation, "is_abbreviation"},
    {Predicate::ActionType, "action_type"},   {Predicate::IsAnagram, "is_anagram"},
    {Predicate::IsHomophone, "is_homophone"},
};

std::optional<Builtin> builtin_named(std::string_view name) {
  for (auto [b, n] : kBuiltins) {
    if (n == name) return b;
  }
  return std::nullopt;
}

std::optional<Predicate> predicate_named(std::string_view name) {
  for (auto [p, n] : kPredicates) {
    if (n == name) return p;
  }
  return std::nullopt;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename Names>
std::string closest_name(std::string_view name, const Names& names, std::size_t max_distance = 2) {
  std::string best;
  std::size_t best_d = max_distance + 1;
  for (const auto& n : names) {
    const std::size_t d = levenshtein(name, n);
    if (d < best_d) {
      best_d = d;
      best = std::string(n);
    }
  }
  return best;
}

std::vector<std::string> callable_names() {
  std::vector<std::string> names;
  for (auto [p, n] : kPredicates) names.emplace_back(n);
  for (auto [b, n] : kBuiltins) names.emplace_back(n);
  return names;
}

std::string reversed(std::string s) {
  std::reverse(s.begin(), s.end());
  return s;
}

std::string collapse_ws(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------- lexing

enum class Tok { String, Ident, Number, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int column;
};

class Lexer {
 public:
  Lexer(std::string_view text, int line) : text_(text), line_(line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      const int col = static_cast<int>(i) + 1;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '#') {
        break;
      } else if (c == '"' || c == '\'') {
        std::string value;
        std::size_t j = i + 1;
        bool closed = false;
        while (j < text_.size()) {
          if (text_[j] == '\\' && j + 1 < text_.size()) {
            value.push_back(text_[j + 1]);
            j += 2;
            continue;
          }
          if (text_[j] == c) {
            closed = true;
            break;
          }
          value.push_back(text_[j++]);
        }
        if (!closed) throw ProofParseError(line_, col, "unterminated string");
        out.push_back({Tok::String, value, col});
        i = j + 1;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_' || text_[j] == '.')) {
          ++j;
        }
        out.push_back({Tok::Ident, std::string(text_.substr(i, j - i)), col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        out.push_back({Tok::Number, std::string(text_.substr(i, j - i)), col});
        i = j;
      } else if ((c == '=' || c == '!') && i + 1 < text_.size() && text_[i + 1] == '=') {
        out.push_back({Tok::Punct, std::string(text_.substr(i, 2)), col});
        i += 2;
      } else if (std::string_view("()[]:,+=-").find(c) != std::string_view::npos) {
        out.push_back({Tok::Punct, std::string(1, c), col});
        ++i;
      } else {
        throw ProofParseError(line_, col, "unexpected character '" + std::string(1, c) + "'");
      }
    }
    out.push_back({Tok::End, "", static_cast<int>(text_.size()) + 1});
    return out;
  }

 private:
  std::string_view text_;
  int line_;
};

// --------------------------------------------------------------- parsing

class StatementParser {
 public:
  StatementParser(std::vector<Token> tokens, int line) : toks_(std::move(tokens)), line_(line) {}

  std::vector<Statement> parse_assert() {
    expect_ident("assert");
    std::vector<Statement> out;
    out.push_back(parse_clause());
    while (is_ident("and")) {
      ++i_;
      out.push_back(parse_clause());
    }
    if (is_punct(",")) {  // assert message
      ++i_;
      if (peek().kind != Tok::String) fail("expected a message string after ','");
      ++i_;
    }
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return out;
  }

  // key="value" pairs, for headers.
  std::vector<std::pair<std::string, std::string>> parse_kwargs(bool parenthesised) {
    std::vector<std::pair<std::string, std::string>> kv;
    if (parenthesised) expect_punct("(");
    while (peek().kind == Tok::Ident) {
      const std::string key = peek().text;
      ++i_;
      expect_punct("=");
      if (peek().kind != Tok::String && peek().kind != Tok::Number) fail("expected a value for '" + key + "'");
      kv.emplace_back(key, peek().text);
      ++i_;
      if (is_punct(",")) ++i_;
    }
    if (parenthesised) {
      expect_punct(")");
      if (is_punct(":")) ++i_;
    }
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' in header");
    return kv;
  }

  std::size_t position() const { return i_; }
  void seek(std::size_t i) { i_ = i; }
  void expect_ident(std::string_view name) {
    if (!is_ident(name)) fail("expected '" + std::string(name) + "'");
    ++i_;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(i_ + ahead, toks_.size() - 1)]; }
  bool is_ident(std::string_view n) const { return peek().kind == Tok::Ident && peek().text == n; }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  [[noreturn]] void fail(const std::string& msg, std::string suggestion = {}) const {
    throw ProofParseError(line_, peek().column, msg, std::move(suggestion));
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'" + (peek().text.empty() ? "" : ", found '" + peek().text + "'"));
    ++i_;
  }

  Statement parse_clause() {
    const int at = line_;
    if (is_ident("not")) {
      ++i_;
      Statement inner = parse_clause();
      return Statement(stmt::AssertNegation{std::move(inner)}, at);
    }
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "(" &&
        !builtin_named(peek().text)) {
      const auto pred = predicate_named(peek().text);
      if (!pred) unknown_callable();
      Statement call(parse_predicate(*pred), at);
      if (is_punct("==")) {
        ++i_;
        if (is_ident("False")) {
          ++i_;
          return Statement(stmt::AssertNegation{std::move(call)}, at);
        }
        if (is_ident("True")) {
          ++i_;
          return call;
        }
        fail("a predicate can only be compared with True or False");
      }
      return call;
    }
    Expr lhs = parse_expr();
    if (is_punct("!=")) fail("only '==' comparisons are supported");
    expect_punct("==");
    Expr rhs = parse_expr();
    return Statement(stmt::AssertEquality{std::move(lhs), std::move(rhs)}, at);
  }

  [[noreturn]] void unknown_callable() const {
    const std::string name = peek().text;
    const std::string best = closest_name(name, callable_names());
    fail("unknown function '" + name + "'" + (best.empty() ? "" : "; did you mean '" + best + "'?"), best);
  }

  stmt::AssertPredicate parse_predicate(Predicate pred) {
    stmt::AssertPredicate call{pred, {}, std::nullopt, std::nullopt};
    ++i_;
    expect_punct("(");
    while (!is_punct(")")) {
      if (peek().kind == Tok::End) fail("missing ')'");
      if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "=") {
        const std::string key = peek().text;
        i_ += 2;
        if (key == "pattern" && pred == Predicate::IsSynonym) {
          if (peek().kind != Tok::String && peek().kind != Tok::Number) fail("expected a pattern string");
          call.pattern = peek().text;
          ++i_;
        } else if (key == "action" && pred == Predicate::ActionType) {
          call.action = parse_action_token();
        } else if (pred == Predicate::ActionType && peek().kind == Tok::Ident) {
          call.action = parse_action_token();
        } else {
          call.args.push_back(parse_expr());
        }
      } else if (peek().kind == Tok::Ident && peek().text.rfind("Action.", 0) == 0) {
        if (pred != Predicate::ActionType) fail("only action_type takes an Action");
        call.action = parse_action_token();
      } else {
        call.args.push_back(parse_expr());
      }
      if (is_punct(",")) {
        ++i_;
      } else if (!is_punct(")")) {
        fail("expected ',' or ')'");
      }
    }
    ++i_;
    check_arity(call);
    return call;
  }

  void check_arity(stmt::AssertPredicate& call) const {
    const std::string name(to_string(call.name));
    if (call.name == Predicate::IsSynonym && call.args.size() == 3 && !call.pattern) {
      if (auto* lit = std::get_if<expr::StringLit>(&call.args[2].value)) {
        call.pattern = lit->text;
        call.args.pop_back();
      }
    }
    const std::size_t want = call.name == Predicate::ActionType ? 1 : 2;
    if (call.args.size() != want) {
      fail(name + " takes " + std::to_string(want) + " argument" + (want == 1 ? "" : "s") + ", got " +
           std::to_string(call.args.size()));
    }
    if (call.name == Predicate::ActionType && !call.action) fail("action_type needs an Action.<KIND> argument");
  }

  ActionKind parse_action_token() {
    if (peek().kind != Tok::Ident) fail("expected Action.<KIND>");
    const std::string text = peek().text;
    auto kind = parse_action(text);
    if (!kind) {
      std::vector<std::string> names;
      for (auto k : kAllActions) names.push_back("Action." + std::string(to_string(k)));
      const std::string best = closest_name(text, names, 3);
      fail("unknown action '" + text + "'" + (best.empty() ? "" : "; did you mean '" + best + "'?"), best);
    }
    ++i_;
    return *kind;
  }

  Expr parse_expr() {
    std::vector<Expr> parts;
    parts.push_back(parse_term());
    while (is_punct("+")) {
      ++i_;
      parts.push_back(parse_term());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return Expr(expr::Concat{std::move(parts)});
  }

  Expr parse_term() {
    Expr e;
    if (peek().kind == Tok::String) {
      e = expr::StringLit{peek().text};
      ++i_;
    } else if (is_punct("(")) {
      ++i_;
      e = parse_expr();
      expect_punct(")");
    } else if (peek().kind == Tok::Ident) {
      const auto fn = builtin_named(peek().text);
      if (!fn) {
        if (peek(1).kind == Tok::Punct && peek(1).text == "(") unknown_callable();
        fail("unknown name '" + peek().text + "'");
      }
      ++i_;
      expect_punct("(");
      expr::Call call{*fn, {}};
      while (!is_punct(")")) {
        call.args.push_back(parse_expr());
        if (is_punct(",")) {
          ++i_;
        } else if (!is_punct(")")) {
          fail("expected ',' or ')'");
        }
      }
      ++i_;
      const std::size_t want = *fn == Builtin::HiddenSpan ? 2 : 1;
      if (call.args.size() != want) {
        fail(std::string(to_string(*fn)) + " takes " + std::to_string(want) + " argument" + (want == 1 ? "" : "s"));
      }
      e = std::move(call);
    } else {
      fail(peek().kind == Tok::End ? "unexpected end of statement" : "unexpected '" + peek().text + "'");
    }
    while (is_punct("[")) e = parse_slice(std::move(e));
    return e;
  }

  std::optional<int> parse_signed() {
    bool neg = false;
    if (is_punct("-")) {
      neg = true;
      ++i_;
    }
    if (peek().kind != Tok::Number) {
      if (neg) fail("expected a number");
      return std::nullopt;
    }
    const int v = std::stoi(peek().text);
    ++i_;
    return neg ? -v : v;
  }

  Expr parse_slice(Expr base) {
    const int col = peek().column;
    ++i_;
    std::optional<int> a, b, c;
    int colons = 0;
    a = parse_signed();
    if (is_punct(":")) {
      ++colons;
      ++i_;
      b = parse_signed();
      if (is_punct(":")) {
        ++colons;
        ++i_;
        c = parse_signed();
      }
    }
    expect_punct("]");
    auto call = [&](Builtin fn) { return Expr(expr::Call{fn, {std::move(base)}}); };
    if (colons == 0 && a == 0) return call(Builtin::First);
    if (colons == 0 && a == -1) return call(Builtin::Last);
    if (colons == 1 && a == 1 && !b) return call(Builtin::DropFirst);
    if (colons == 1 && !a && b == -1) return call(Builtin::DropLast);
    if (colons == 2 && !a && !b && c == -1) return call(Builtin::Reverse);
    if (colons == 2 && !a && !b && c == 2) return call(Builtin::OddLetters);
    if (colons == 2 && a == 1 && !b && c == 2) return call(Builtin::EvenLetters);
    throw ProofParseError(line_, col,
                          "unsupported slice; use [1:], [:-1], [0], [-1], [::-1], [::2] or [1::2]");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  int line_;
};

// Joins continuation lines starting at `i` until brackets balance and no
// trailing backslash remains. Advances `i` past the consumed lines.
std::string logical_line(const std::vector<std::string>& lines, std::size_t& i) {
  std::string out;
  int depth = 0;
  while (i < lines.size()) {
    std::string part = lines[i++];
    char quote = 0;
    bool continued = false;
    std::size_t end = part.size();
    for (std::size_t k = 0; k < part.size(); ++k) {
      const char c = part[k];
      if (quote) {
        if (c == '\\') {
          ++k;
        } else if (c == quote) {
          quote = 0;
        }
        continue;
      }
      if (c == '"' || c == '\'') quote = c;
      if (c == '#') {
        end = k;
        break;
      }
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
    }
    std::string kept = part.substr(0, end);
    while (!kept.empty() && std::isspace(static_cast<unsigned char>(kept.back()))) kept.pop_back();
    if (!kept.empty() && kept.back() == '\\') {
      kept.pop_back();
      continued = true;
    }
    if (!out.empty()) out += ' ';
    out += trim(kept);
    if (!continued && depth <= 0 && !quote) break;
  }
  return out;
}

void read_docstring_fields(const std::string& body, ProofScript& proof) {
  std::string* target = nullptr;
  std::string definition, wordplay;
  bool have_def = false, have_wp = false;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t nl = body.find('\n', start);
    if (nl == std::string::npos) nl = body.size();
    const std::string line = trim(std::string_view(body).substr(start, nl - start));
    start = nl + 1;
    if (line.rfind("definition:", 0) == 0) {
      target = &definition;
      have_def = true;
      *target = line.substr(11);
    } else if (line.rfind("wordplay:", 0) == 0) {
      target = &wordplay;
      have_wp = true;
      *target = line.substr(9);
    } else if (!line.empty() && line[0] == '#') {
      continue;
    } else if (target && !line.empty()) {
      *target += "\n" + line;
    }
    if (nl == body.size()) break;
  }
  auto clean = [](const std::string& s) {
    std::string t = s;
    // A trailing backslash joins the next line.
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == '\\' && (i + 1 == t.size() || t[i + 1] == '\n' || t[i + 1] == ' ')) {
        std::size_t j = i + 1;
        while (j < t.size() && t[j] == ' ') ++j;
        if (j == t.size() || t[j] == '\n') continue;
      }
      out.push_back(t[i]);
    }
    return collapse_ws(out);
  };
  if (have_def) proof.definition = clean(definition);
  if (have_wp) proof.wordplay = clean(wordplay);
}

void apply_header(ProofScript& proof, const std::vector<std::pair<std::string, std::string>>& kv, int line) {
  bool have_answer = false;
  for (const auto& [key, value] : kv) {
    if (key == "answer") {
      proof.header.answer = value;
      have_answer = true;
    } else if (key == "clue") {
      proof.header.clue = collapse_ws(value);
    } else if (key == "pattern") {
      proof.header.pattern = trim(value);
    } else {
      throw ProofParseError(line, 1, "unknown header field '" + key + "'");
    }
  }
  if (!have_answer) throw ProofParseError(line, 1, "proof header needs answer=\"...\"");
}

std::string quote(std::string_view text, Quotes q) {
  const char qc = q == Quotes::Double ? '"' : '\'';
  std::string out(1, qc);
  for (char c : text) {
    if (c == qc || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back(qc);
  return out;
}

}  // namespace

ProofParseError::ProofParseError(int line, int column, std::string message, std::string suggestion)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line), column_(column), message_(std::move(message)), suggestion_(std::move(suggestion)) {}

std::string_view to_string(Builtin b) {
  for (auto [k, n] : kBuiltins) {
    if (k == b) return n;
  }
  return "?";
}

std::string_view to_string(Predicate p) {
  for (auto [k, n] : kPredicates) {
    if (k == p) return n;
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Proved: return "PROVED";
    case Status::Failed: return "FAILED";
    case Status::ParseError: return "PARSE_ERROR";
  }
  return "?";
}

std::string_view to_string(LintKind k) {
  switch (k) {
    case LintKind::NoAssertions: return "NO_ASSERTIONS";
    case LintKind::NegatedAssertCheat: return "NEGATED_ASSERT_CHEAT";
    case LintKind::DisconnectedChain: return "DISCONNECTED_CHAIN";
    case LintKind::UnusedClueTokens: return "UNUSED_CLUE_TOKENS";
  }
  return "?";
}

std::string_view to_string(Severity s) { return s == Severity::Fatal ? "FATAL" : "WARN"; }

bool VerificationOutcome::has_lint(LintKind k) const {
  return std::any_of(lints.begin(), lints.end(), [k](const LintFlag& f) { return f.kind == k; });
}

std::string eval_expr(const Expr& e) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, expr::StringLit>) {
          return normalize_letters(v.text);
        } else if constexpr (std::is_same_v<T, expr::Concat>) {
          std::string out;
          for (const auto& p : v.parts) out += eval_expr(p);
          return out;
        } else {
          if (v.fn == Builtin::Initials) {
            const auto* lit = std::get_if<expr::StringLit>(&v.args[0].value);
            std::string out;
            for (const auto& w : split_words(lit ? lit->text : eval_expr(v.args[0]))) {
              const std::string l = normalize_letters(w);
              if (!l.empty()) out.push_back(l[0]);
            }
            return out;
          }
          const std::string s = eval_expr(v.args[0]);
          switch (v.fn) {
            case Builtin::Reverse: return reversed(s);
            case Builtin::DropFirst:
              if (s.empty()) throw EmptyOperand("drop_first of an empty string");
              return s.substr(1);
            case Builtin::DropLast: return s.empty() ? s : s.substr(0, s.size() - 1);
            case Builtin::First:
              if (s.empty()) throw EmptyOperand("first of an empty string");
              return s.substr(0, 1);
            case Builtin::Last: return s.empty() ? s : s.substr(s.size() - 1);
            case Builtin::OddLetters:
            case Builtin::EvenLetters: {
              std::string out;
              for (std::size_t i = v.fn == Builtin::OddLetters ? 0 : 1; i < s.size(); i += 2) out.push_back(s[i]);
              return out;
            }
            case Builtin::HiddenSpan: {
              const std::string letters = eval_expr(v.args[1]);
              return !letters.empty() && s.find(letters) != std::string::npos ? letters : std::string();
            }
            case Builtin::Initials: break;
          }
          return s;
        }
      },
      e.value);
}

std::string render_expr(const Expr& e, Quotes quotes) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, expr::StringLit>) {
          return quote(v.text, quotes);
        } else if constexpr (std::is_same_v<T, expr::Concat>) {
          std::string out;
          for (std::size_t i = 0; i < v.parts.size(); ++i) {
            if (i > 0) out += " + ";
            const bool wrap = std::holds_alternative<expr::Concat>(v.parts[i].value);
            out += wrap ? "(" + render_expr(v.parts[i], quotes) + ")" : render_expr(v.parts[i], quotes);
          }
          return out;
        } else {
          std::string out = std::string(to_string(v.fn)) + "(";
          for (std::size_t i = 0; i < v.args.size(); ++i) {
            if (i > 0) out += ", ";
            out += render_expr(v.args[i], quotes);
          }
          return out + ")";
        }
      },
      e.value);
}

std::string render_statement(const Statement& s, Quotes quotes) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, stmt::AssertPredicate>) {
          std::string out = std::string(to_string(v.name)) + "(";
          for (std::size_t i = 0; i < v.args.size(); ++i) {
            if (i > 0) out += ", ";
            out += render_expr(v.args[i], quotes);
          }
          if (v.action) out += ", Action." + std::string(to_string(*v.action));
          if (v.pattern) out += ", pattern=" + quote(*v.pattern, quotes);
          return out + ")";
        } else if constexpr (std::is_same_v<T, stmt::AssertEquality>) {
          return render_expr(v.lhs, quotes) + " == " + render_expr(v.rhs, quotes);
        } else {
          return "not " + render_statement(*v.inner, quotes);
        }
      },
      s.value);
}

std::string render_proof(const ProofScript& proof) {
  std::string out = "proof answer=" + quote(proof.header.answer, Quotes::Double) +
                    " clue=" + quote(proof.header.clue, Quotes::Double) +
                    " pattern=" + quote(proof.header.pattern, Quotes::Double) + "\n";
  if (!proof.definition.empty()) out += "definition: " + proof.definition + "\n";
  if (!proof.wordplay.empty()) out += "wordplay: " + proof.wordplay + "\n";
  for (const auto& s : proof.statements) out += "assert " + render_statement(s) + "\n";
  return out;
}

ProofScript parse_proof(std::string_view script) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= script.size()) {
      std::size_t nl = script.find('\n', start);
      if (nl == std::string_view::npos) nl = script.size();
      std::string line(script.substr(start, nl - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      if (nl == script.size()) break;
      start = nl + 1;
    }
  }

  ProofScript proof;
  bool have_header = false;
  std::size_t i = 0;
  while (i < lines.size()) {
    const int line_no = static_cast<int>(i) + 1;
    const std::string t = trim(lines[i]);
    if (t.empty() || t[0] == '#' || t.rfind("```", 0) == 0) {
      ++i;
      continue;
    }
    if (t == "proof()" || (t.rfind("proof()", 0) == 0 && trim(t.substr(7)).rfind('#', 0) == 0)) {
      ++i;
      continue;
    }
    if (t.rfind("def ", 0) == 0) {
      const std::string joined = logical_line(lines, i);
      auto toks = Lexer(joined, line_no).run();
      StatementParser p(std::move(toks), line_no);
      p.expect_ident("def");
      p.expect_ident("proof");
      apply_header(proof, p.parse_kwargs(true), line_no);
      have_header = true;
      continue;
    }
    if (t.rfind("proof ", 0) == 0 || t == "proof") {
      const std::string joined = logical_line(lines, i);
      auto toks = Lexer(joined, line_no).run();
      StatementParser p(std::move(toks), line_no);
      p.expect_ident("proof");
      apply_header(proof, p.parse_kwargs(false), line_no);
      have_header = true;
      continue;
    }
    if (t.rfind("\"\"\"", 0) == 0 || t.rfind("'''", 0) == 0) {
      const std::string delim = t.substr(0, 3);
      std::string body = t.substr(3);
      auto close = body.find(delim);
      ++i;
      while (close == std::string::npos) {
        if (i >= lines.size()) throw ProofParseError(line_no, 1, "unterminated docstring");
        body += "\n" + lines[i++];
        close = body.find(delim);
      }
      body.resize(close);
      read_docstring_fields(body, proof);
      continue;
    }
    if (t.rfind("definition:", 0) == 0 || t.rfind("wordplay:", 0) == 0) {
      const bool is_def = t[0] == 'd';
      std::string text = t.substr(is_def ? 11 : 9);
      ++i;
      while (!text.empty() && trim(text).back() == '\\' && i < lines.size()) {
        text = trim(text);
        text.pop_back();
        text += " " + trim(lines[i++]);
      }
      (is_def ? proof.definition : proof.wordplay) = collapse_ws(text);
      continue;
    }
    if (t.rfind("assert", 0) == 0 && (t.size() == 6 || !std::isalnum(static_cast<unsigned char>(t[6])))) {
      const std::size_t indent = lines[i].find_first_not_of(" \t");
      const std::string joined = logical_line(lines, i);
      std::vector<Token> toks;
      try {
        toks = Lexer(joined, line_no).run();
      } catch (const ProofParseError& e) {
        throw ProofParseError(e.line(), e.column() + static_cast<int>(indent), e.message(), e.suggestion());
      }
      for (auto& tok : toks) tok.column += static_cast<int>(indent);
      StatementParser p(std::move(toks), line_no);
      for (auto& s : p.parse_assert()) proof.statements.push_back(std::move(s));
      continue;
    }
    const std::size_t indent = lines[i].find_first_not_of(" \t");
    const std::string word = t.substr(0, t.find_first_of(" (\t"));
    const std::string best = closest_name(word, std::vector<std::string>{"assert", "proof", "definition", "wordplay"});
    throw ProofParseError(line_no, static_cast<int>(indent) + 1,
                          "unexpected line '" + t + "'" + (best.empty() ? "" : "; did you mean '" + best + "'?"),
                          best);
  }
  if (!have_header) throw ProofParseError(1, 1, "missing proof header (proof answer=\"...\" clue=\"...\" pattern=\"...\")");
  return proof;
}

// ------------------------------------------------------------- checking

namespace {

struct Check {
  bool ok;
  std::string hint;
};

std::string arg_text(const Expr& e) {
  if (const auto* lit = std::get_if<expr::StringLit>(&e.value)) return lit->text;
  return eval_expr(e);
}

std::string squote(std::string_view s) { return "'" + std::string(s) + "'"; }

Check check_statement(const Statement& s, const Oracles& oracles) {
  return std::visit(
      [&](const auto& v) -> Check {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, stmt::AssertPredicate>) {
          const std::string a = arg_text(v.args[0]);
          OracleVerdict verdict;
          switch (v.name) {
            case Predicate::IsSynonym: {
              std::optional<Pattern> pattern;
              if (v.pattern) {
                try {
                  pattern = Pattern::parse(*v.pattern);
                } catch (const PatternError&) {
                  return {false, squote(*v.pattern) + " is not a valid pattern"};
                }
              }
              verdict = oracles.is_synonym(a, arg_text(v.args[1]), pattern);
              break;
            }
            case Predicate::IsAbbreviation: verdict = oracles.is_abbreviation(a, arg_text(v.args[1])); break;
            case Predicate::ActionType: verdict = oracles.action_type(a, *v.action); break;
            case Predicate::IsAnagram: verdict = oracles.is_anagram(a, arg_text(v.args[1])); break;
            case Predicate::IsHomophone: verdict = oracles.is_homophone(a, arg_text(v.args[1])); break;
          }
          return {verdict.ok, verdict.hint()};
        } else if constexpr (std::is_same_v<T, stmt::AssertEquality>) {
          const std::string l = eval_expr(v.lhs);
          const std::string r = eval_expr(v.rhs);
          if (l == r) return {true, ""};
          const bool l_lit = std::holds_alternative<expr::StringLit>(v.lhs.value);
          const bool r_lit = std::holds_alternative<expr::StringLit>(v.rhs.value);
          std::string hint;
          if (!l_lit && r_lit) {
            hint = render_expr(v.lhs, Quotes::Single) + " evaluates to " + squote(l) + ", not " + squote(r);
          } else if (l_lit && !r_lit) {
            hint = render_expr(v.rhs, Quotes::Single) + " evaluates to " + squote(r) + ", not " + squote(l);
          } else if (!l_lit) {
            hint = render_expr(v.lhs, Quotes::Single) + " evaluates to " + squote(l) + " but " +
                   render_expr(v.rhs, Quotes::Single) + " evaluates to " + squote(r);
          } else {
            hint = squote(l) + " and " + squote(r) + " are different letters";
          }
          return {false, hint};
        } else {
          const Check inner = check_statement(*v.inner, oracles);
          if (!inner.ok) return {true, ""};
          return {false, render_statement(*v.inner, Quotes::Single) + " holds, so its negation fails"};
        }
      },
      s.value);
}

void collect_exprs(const Statement& s, std::vector<const Expr*>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, stmt::AssertPredicate>) {
          for (const auto& a : v.args) out.push_back(&a);
        } else if constexpr (std::is_same_v<T, stmt::AssertEquality>) {
          out.push_back(&v.lhs);
          out.push_back(&v.rhs);
        } else {
          collect_exprs(*v.inner, out);
        }
      },
      s.value);
}

void collect_literals(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, expr::StringLit>) {
          out.push_back(v.text);
        } else {
          const auto& children = [&]() -> const std::vector<Expr>& {
            if constexpr (std::is_same_v<T, expr::Concat>) {
              return v.parts;
            } else {
              return v.args;
            }
          }();
          for (const auto& c : children) collect_literals(c, out);
        }
      },
      e.value);
}

const std::set<std::string> kLinkWords = {"a",    "an",  "the",  "and",  "of",   "to",    "with", "for",
                                          "on",   "at",  "by",   "is",   "be",   "as",    "from", "that",
                                          "this", "it",  "its",  "get",  "gives", "s",    "there", "when",
                                          "so",   "are", "was",  "has",  "one's", "what", "or"};

}  // namespace

std::vector<LintFlag> lint(const ProofScript& proof) {
  std::vector<LintFlag> flags;
  if (proof.statements.empty()) {
    flags.push_back({LintKind::NoAssertions, Severity::Fatal, "proof contains no assert statements"});
  }
  for (const auto& s : proof.statements) {
    if (const auto* neg = std::get_if<stmt::AssertNegation>(&s.value)) {
      if (std::holds_alternative<stmt::AssertPredicate>(neg->inner->value)) {
        flags.push_back({LintKind::NegatedAssertCheat, Severity::Fatal,
                         "'" + render_statement(s, Quotes::Single) + "' asserts that an oracle check fails"});
      }
    }
  }

  const std::string answer = normalize_letters(proof.header.answer);
  bool connected = false;
  std::vector<std::string> literals;
  for (const auto& s : proof.statements) {
    std::vector<const Expr*> exprs;
    collect_exprs(s, exprs);
    for (const Expr* e : exprs) {
      collect_literals(*e, literals);
      try {
        if (!answer.empty() && eval_expr(*e) == answer) connected = true;
      } catch (const EmptyOperand&) {
      }
    }
  }
  if (!connected) {
    flags.push_back({LintKind::DisconnectedChain, Severity::Warn,
                     "no assertion mentions the answer '" + proof.header.answer + "'"});
  }

  std::set<std::string> used;
  for (const auto& lit : literals) {
    for (auto& w : split_words(lit)) used.insert(w);
  }
  std::vector<std::string> unused;
  for (const auto& w : split_words(proof.header.clue)) {
    if (kLinkWords.count(w) || used.count(w)) continue;
    if (std::find(unused.begin(), unused.end(), w) == unused.end()) unused.push_back(w);
  }
  if (!unused.empty()) {
    std::string detail = "clue words not used by any assertion:";
    for (const auto& w : unused) detail += " " + w;
    flags.push_back({LintKind::UnusedClueTokens, Severity::Warn, detail});
  }
  return flags;
}

VerificationOutcome verify(const ProofScript& proof, const Oracles& oracles) {
  VerificationOutcome out;
  try {
    const Pattern pattern = Pattern::parse(proof.header.pattern);
    if (!pattern_matches(proof.header.answer, pattern)) {
      out.failures.push_back({-1, "proof header",
                              squote(proof.header.answer) + " does not match pattern " + squote(pattern.render())});
    }
  } catch (const PatternError&) {
    out.failures.push_back({-1, "proof header", squote(proof.header.pattern) + " is not a valid pattern"});
  }

  for (std::size_t i = 0; i < proof.statements.size(); ++i) {
    const auto& s = proof.statements[i];
    Check c;
    try {
      c = check_statement(s, oracles);
    } catch (const EmptyOperand& e) {
      c = {false, e.what()};
    }
    if (c.ok) continue;
    const auto* pred = std::get_if<stmt::AssertPredicate>(&s.value);
    const bool colon = pred && (pred->name == Predicate::IsSynonym || pred->name == Predicate::IsAbbreviation);
    out.failures.push_back(
        {static_cast<int>(i), std::string(colon ? "assert: " : "assert ") + render_statement(s, Quotes::Single),
         c.hint});
  }

  out.lints = lint(proof);
  const bool fatal = std::any_of(out.lints.begin(), out.lints.end(),
                                 [](const LintFlag& f) { return f.severity == Severity::Fatal; });
  out.status = out.failures.empty() && !fatal ? Status::Proved : Status::Failed;
  return out;
}

VerificationOutcome verify(const ProofScript& proof, const Lexicon& lexicon) {
  return verify(proof, Oracles(std::shared_ptr<const Lexicon>(std::shared_ptr<const Lexicon>{}, &lexicon)));
}

VerificationOutcome verify_script(std::string_view script, const Oracles& oracles) {
  try {
    return verify(parse_proof(script), oracles);
  } catch (const ProofParseError& e) {
    VerificationOutcome out;
    out.status = Status::ParseError;
    out.diagnostic = e.what();
    return out;
  }
}

const std::string kRewriteInstruction =
    "# Please re-implement the SOLUTION above (altering both the docstring and the python code as required), "
    "taking care to fix each of the problems identified, and return the whole function:";

std::string render_failure_report(const VerificationOutcome& outcome) {
  if (outcome.status == Status::Proved) throw Error("a proved outcome has no failure report");
  std::string out;
  if (outcome.status == Status::ParseError) {
    out += "AssertionError: proof does not parse : " + outcome.diagnostic + "\n";
  }
  for (const auto& f : outcome.failures) {
    out += "AssertionError: " + f.message + (f.hint.empty() ? "" : " : " + f.hint) + "\n";
  }
  for (const auto& l : outcome.lints) {
    if (l.severity != Severity::Fatal) continue;
    out += "AssertionError: lint " + std::string(to_string(l.kind)) + " : " + l.detail + "\n";
  }
  out += "\n" + kRewriteInstruction + "\n";
  return out;
}

}  // namespace cryptic
