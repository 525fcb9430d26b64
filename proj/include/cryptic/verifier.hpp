// Proof scripts: a closed assertion grammar checked against the oracles.
//
//   proof answer="CAMERA" clue="arrived with an artist, to get optical device" pattern="6"
//   definition: arrived with an artist, to get {optical device}
//   wordplay: CAME (arrived) + RA (artist, short form)
//   assert is_synonym("arrived", "CAME")
//   assert is_abbreviation("artist", "RA")
//   assert "CAME" + "RA" == "CAMERA"
//   assert is_synonym("optical device", "CAMERA", pattern="6")
//
// The python-flavoured `def proof(...)` form with a docstring is read too.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cryptic/box.hpp"
#include "cryptic/core.hpp"
#include "cryptic/oracles.hpp"

namespace cryptic {

enum class Builtin { Reverse, DropFirst, DropLast, First, Last, Initials, OddLetters, EvenLetters, HiddenSpan };

std::string_view to_string(Builtin b);

struct Expr;

namespace expr {
struct StringLit {
  std::string text;  // as written; letters are normalized on evaluation
  bool operator==(const StringLit&) const = default;
};
struct Concat {
  std::vector<Expr> parts;
  bool operator==(const Concat&) const = default;
};
struct Call {
  Builtin fn;
  std::vector<Expr> args;
  bool operator==(const Call&) const = default;
};
}  // namespace expr

struct Expr {
  std::variant<expr::StringLit, expr::Concat, expr::Call> value;

  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Expr>)
  Expr(T v) : value(std::move(v)) {}  // NOLINT
  Expr() : value(expr::StringLit{}) {}

  bool operator==(const Expr&) const = default;
};

class EmptyOperand : public Error {
 public:
  using Error::Error;
};

/// Letters an expression denotes.
std::string eval_expr(const Expr& e);

enum class Predicate { IsSynonym, IsAbbreviation, ActionType, IsAnagram, IsHomophone };

std::string_view to_string(Predicate p);

struct Statement;

namespace stmt {
struct AssertPredicate {
  Predicate name;
  std::vector<Expr> args;              // phrase-like arguments in order
  std::optional<ActionKind> action;    // action_type only
  std::optional<std::string> pattern;  // is_synonym only
  bool operator==(const AssertPredicate&) const = default;
};
struct AssertEquality {
  Expr lhs;
  Expr rhs;
  bool operator==(const AssertEquality&) const = default;
};
struct AssertNegation {
  Box<Statement> inner;
  bool operator==(const AssertNegation&) const = default;
};
}  // namespace stmt

struct Statement {
  std::variant<stmt::AssertPredicate, stmt::AssertEquality, stmt::AssertNegation> value;
  int line = 0;

  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Statement>)
  Statement(T v, int at = 0) : value(std::move(v)), line(at) {}  // NOLINT
  Statement() = default;

  bool operator==(const Statement& o) const { return value == o.value; }
};

struct ProofHeader {
  std::string answer;
  std::string clue;
  std::string pattern;
  bool operator==(const ProofHeader&) const = default;
};

struct ProofScript {
  ProofHeader header;
  std::string definition;
  std::string wordplay;
  std::vector<Statement> statements;
  bool operator==(const ProofScript&) const = default;
};

class ProofParseError : public Error {
 public:
  ProofParseError(int line, int column, std::string message, std::string suggestion = {});
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }
  /// Closest known name for an unknown identifier, or empty.
  const std::string& suggestion() const { return suggestion_; }

 private:
  int line_;
  int column_;
  std::string message_;
  std::string suggestion_;
};

ProofScript parse_proof(std::string_view script);

enum class Quotes { Double, Single };

/// Source form of a statement, without the leading `assert`.
std::string render_statement(const Statement& s, Quotes quotes = Quotes::Double);
std::string render_expr(const Expr& e, Quotes quotes = Quotes::Double);

/// Canonical native script text; parse_proof(render_proof(p)) == p.
std::string render_proof(const ProofScript& proof);

enum class Status { Proved, Failed, ParseError };
std::string_view to_string(Status s);

enum class LintKind { NoAssertions, NegatedAssertCheat, DisconnectedChain, UnusedClueTokens };
enum class Severity { Fatal, Warn };
std::string_view to_string(LintKind k);
std::string_view to_string(Severity s);

struct LintFlag {
  LintKind kind;
  Severity severity;
  std::string detail;
  bool operator==(const LintFlag&) const = default;
};

struct Failure {
  int statement_index;  // -1 for the header
  std::string message;  // e.g. "assert: is_abbreviation('an Artist', 'RA')"
  std::string hint;
  bool operator==(const Failure&) const = default;
};

struct VerificationOutcome {
  Status status = Status::Failed;
  std::vector<Failure> failures;
  std::vector<LintFlag> lints;
  std::string diagnostic;  // parse diagnostic when status is ParseError

  bool proved() const { return status == Status::Proved; }
  bool has_lint(LintKind k) const;
  bool operator==(const VerificationOutcome&) const = default;
};

VerificationOutcome verify(const ProofScript& proof, const Oracles& oracles);
VerificationOutcome verify(const ProofScript& proof, const Lexicon& lexicon);

/// parse_proof then verify; a parse failure becomes a ParseError outcome.
VerificationOutcome verify_script(std::string_view script, const Oracles& oracles);

std::vector<LintFlag> lint(const ProofScript& proof);

extern const std::string kRewriteInstruction;

/// One AssertionError line per failure and fatal lint, then the rewrite
/// instruction. Throws Error for a proved outcome.
std::string render_failure_report(const VerificationOutcome& outcome);

}  // namespace cryptic
