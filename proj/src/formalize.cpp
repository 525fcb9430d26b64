#include "cryptic/formalize.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cryptic/dataset.hpp"
#include "cryptic/generators.hpp"

namespace cryptic {

using namespace node;

namespace {

Expr lit(std::string s) { return Expr(expr::StringLit{std::move(s)}); }

Statement synonym(std::string phrase, std::string letters, std::optional<std::string> pattern = std::nullopt) {
  return Statement(
      stmt::AssertPredicate{Predicate::IsSynonym, {lit(std::move(phrase)), lit(std::move(letters))}, std::nullopt,
                            std::move(pattern)});
}

Statement predicate(Predicate p, std::string a, std::string b) {
  return Statement(stmt::AssertPredicate{p, {lit(std::move(a)), lit(std::move(b))}, std::nullopt, std::nullopt});
}

Statement action(std::string phrase, ActionKind kind) {
  return Statement(stmt::AssertPredicate{Predicate::ActionType, {lit(std::move(phrase))}, kind, std::nullopt});
}

Statement equality(Expr lhs, Expr rhs) { return Statement(stmt::AssertEquality{std::move(lhs), std::move(rhs)}); }

// Joins expressions into one flat concatenation.
Expr concat(std::vector<Expr> parts) {
  std::vector<Expr> flat;
  for (auto& p : parts) {
    if (auto* c = std::get_if<expr::Concat>(&p.value)) {
      for (auto& q : c->parts) flat.push_back(std::move(q));
    } else if (auto* l = std::get_if<expr::StringLit>(&p.value); l && l->text.empty()) {
      continue;
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.size() == 1) return std::move(flat.front());
  return Expr(expr::Concat{std::move(flat)});
}

class Emitter {
 public:
  std::vector<Statement> statements;

  // Emits checks for `n` and returns an expression for its letters.
  Expr emit(const WordplayNode& n) {
    return std::visit([&](const auto& v) { return emit_node(v, n); }, n.value);
  }

 private:
  void indicator(const std::string& text, ActionKind kind) {
    if (!text.empty()) statements.push_back(action(text, kind));
  }

  Expr emit_node(const Literal& v, const WordplayNode&) { return lit(v.letters); }
  Expr emit_node(const SynonymOf& v, const WordplayNode&) {
    statements.push_back(synonym(v.phrase, v.letters));
    return lit(v.letters);
  }
  Expr emit_node(const AbbrevOf& v, const WordplayNode&) {
    statements.push_back(predicate(Predicate::IsAbbreviation, v.phrase, v.letters));
    return lit(v.letters);
  }
  Expr emit_node(const Anagram& v, const WordplayNode&) {
    emit(*v.source);
    indicator(v.indicator, ActionKind::Anagram);
    const std::string src = surface_letters(*v.source);
    const std::string result = v.result.empty() ? src : v.result;
    statements.push_back(predicate(Predicate::IsAnagram, src, result));
    return lit(result);
  }
  Expr emit_node(const Reversal& v, const WordplayNode& n) {
    emit(*v.source);
    indicator(v.indicator, ActionKind::Reverse);
    const std::string result = surface_letters(n);
    statements.push_back(
        equality(Expr(expr::Call{Builtin::Reverse, {lit(surface_letters(*v.source))}}), lit(result)));
    return lit(result);
  }
  Expr emit_node(const Deletion& v, const WordplayNode& n) {
    emit(*v.source);
    const std::string src = surface_letters(*v.source);
    const std::string kept = surface_letters(n);
    ActionKind kind = ActionKind::Substring;
    if (v.kind == DeletionKind::First) kind = ActionKind::RemoveFirst;
    if (v.kind == DeletionKind::Last) kind = kept.size() == 1 ? ActionKind::Initials : ActionKind::RemoveLast;
    indicator(v.indicator, kind);
    std::size_t off = 0;
    if (v.kind == DeletionKind::Inner) off = std::min(v.offset, src.size());
    if (v.kind == DeletionKind::Last) off = kept.size();
    const std::size_t stop = std::min(src.size(), off + v.removed.size());
    statements.push_back(
        equality(concat({lit(src.substr(0, off)), lit(v.removed), lit(src.substr(stop))}), lit(src)));
    return lit(kept);
  }
  Expr emit_node(const Initials& v, const WordplayNode& n) {
    indicator(v.indicator, ActionKind::Initials);
    std::string phrase;
    for (const auto& p : v.phrases) phrase += (phrase.empty() ? "" : " ") + p;
    const std::string result = surface_letters(n);
    statements.push_back(equality(Expr(expr::Call{Builtin::Initials, {lit(phrase)}}), lit(result)));
    return lit(result);
  }
  Expr emit_node(const Hidden& v, const WordplayNode&) {
    indicator(v.indicator, ActionKind::Substring);
    statements.push_back(
        equality(Expr(expr::Call{Builtin::HiddenSpan, {lit(v.host_text), lit(v.letters)}}), lit(v.letters)));
    return lit(v.letters);
  }
  Expr emit_node(const Container& v, const WordplayNode& n) {
    emit(*v.outer);
    Expr inner = emit(*v.inner);
    indicator(v.indicator, v.placement == Placement::Outside ? ActionKind::GoesOutside : ActionKind::GoesInside);
    const std::string outer = surface_letters(*v.outer);
    if (v.outer_split < 1 || static_cast<std::size_t>(v.outer_split) >= outer.size()) {
      throw UnsupportedNode("container insertion point @" + std::to_string(v.outer_split) + " is not inside '" +
                            outer + "'");
    }
    const std::string head = outer.substr(0, static_cast<std::size_t>(v.outer_split));
    const std::string tail = outer.substr(static_cast<std::size_t>(v.outer_split));
    statements.push_back(equality(lit(outer), concat({lit(head), lit(tail)})));
    const std::string result = surface_letters(n);
    statements.push_back(equality(concat({lit(head), std::move(inner), lit(tail)}), lit(result)));
    return lit(result);
  }
  Expr emit_node(const Homophone& v, const WordplayNode&) {
    if (v.letters.empty()) throw UnsupportedNode("homophone of \"" + v.sounds_like + "\" has no spelling");
    if (!v.origin.empty()) statements.push_back(synonym(v.origin, normalize_letters(v.sounds_like)));
    indicator(v.indicator, ActionKind::Homophone);
    statements.push_back(predicate(Predicate::IsHomophone, v.sounds_like, v.letters));
    return lit(v.letters);
  }
  Expr emit_node(const DoubleDefinition& v, const WordplayNode&) { return lit(v.letters); }
  Expr emit_node(const Sequence& v, const WordplayNode&) {
    std::vector<Expr> parts;
    for (const auto& p : v.parts) parts.push_back(emit(p));
    return concat(std::move(parts));
  }
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string dquote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ProofScript compile_wordplay(const WordplayNode& node, const ProofRequest& request) {
  ProofScript proof;
  const std::string answer = normalize_letters(request.candidate_answer);
  proof.header = {answer, request.clue.surface, request.clue.pattern.render()};
  proof.definition = request.definition;
  proof.wordplay = request.wordplay.empty() ? render_wordplay(node) : request.wordplay;

  Emitter em;
  const bool dd = node.as<DoubleDefinition>() != nullptr;
  if (!dd) {
    if (surface_letters(node).empty()) throw UnsupportedNode("wordplay contributes no letters");
    Expr letters = em.emit(node);
    const bool differs = eval_expr(letters) != answer;
    if (node.as<Sequence>() || differs) em.statements.push_back(equality(std::move(letters), lit(answer)));
  }
  const std::string pattern = request.clue.pattern.render();
  std::vector<DefinitionSpan> spans;
  if (!request.definition.empty()) spans = extract_definition(request.definition).spans;
  for (const auto& span : spans) em.statements.push_back(synonym(span.text, answer, pattern));
  proof.statements = std::move(em.statements);
  return proof;
}

ProofScript compile_request(const ProofRequest& request, const Lexicon* lexicon) {
  ParseOptions opts;
  opts.lexicon = lexicon;
  opts.answer = normalize_letters(request.candidate_answer);
  return compile_wordplay(parse_wordplay(request.wordplay, opts), request);
}

PromptSections PromptSections::load(const std::filesystem::path& dir) {
  PromptSections s;
  s.preamble = chomp(read_file(dir / "preamble.txt"));
  s.many_shot = chomp(read_file(dir / "many_shot.txt"));
  s.functions = chomp(read_file(dir / "functions.txt"));
  s.few_shot = chomp(read_file(dir / "few_shot.txt"));
  s.instruction = chomp(read_file(dir / "instruction.txt"));
  return s;
}

std::string render_request_stub(const ProofRequest& request) {
  std::string out = "def proof(answer=" + dquote(normalize_letters(request.candidate_answer)) + ",\n";
  out += "          clue=" + dquote(request.clue.surface) + ", pattern='" + request.clue.pattern.render() + "'):\n";
  out += "  \"\"\"\n";
  out += "  definition: " + request.definition + "\n";
  out += "  wordplay: " + request.wordplay + "\n";
  out += "  \"\"\"\n";
  return out;
}

std::string build_prompt(const ProofRequest& request, const std::optional<std::string>& failure_report,
                         const PromptSections& sections, const std::string& previous_response) {
  std::string out;
  for (const std::string* s :
       {&sections.preamble, &sections.many_shot, &sections.functions, &sections.few_shot}) {
    out += *s + "\n\n";
  }
  out += sections.instruction + "\n\n```python\n" + render_request_stub(request) + "```\n";
  if (failure_report && !failure_report->empty()) {
    out += "\n" + chomp(previous_response) + "\n\n" + chomp(*failure_report) + "\n\n```python\n" +
           render_request_stub(request) + "```\n";
  }
  return out;
}

GeneratorTranscript prove_with_rewrites(const ProofRequest& request, ProofGenerator& generator,
                                        const Oracles& oracles, const PromptSections& sections, int max_rewrites) {
  if (max_rewrites < 0) throw Error("rewrite cap must be >= 0");
  GeneratorTranscript t;
  std::string prompt = build_prompt(request, std::nullopt, sections);
  for (int attempt = 0; attempt <= max_rewrites; ++attempt) {
    std::string response;
    try {
      response = generator.generate(prompt);
    } catch (const GeneratorUnavailable& e) {
      t.reason = std::string("generator unavailable: ") + e.what();
      return t;
    }
    Attempt a;
    a.prompt = prompt;
    a.response = response;
    a.outcome = verify_script(response, oracles);
    if (a.outcome.status != Status::ParseError) {
      const std::string answer = normalize_letters(parse_proof(response).header.answer);
      const std::string wanted = normalize_letters(request.candidate_answer);
      if (answer != wanted) {
        a.outcome.failures.insert(a.outcome.failures.begin(),
                                  {-1, "proof header", "the proof is for '" + answer + "', not '" + wanted + "'"});
        a.outcome.status = Status::Failed;
      }
    }
    if (a.outcome.proved()) {
      t.attempts.push_back(std::move(a));
      t.rewrites_used = attempt;
      return t;
    }
    a.failure_report = render_failure_report(a.outcome);
    prompt = build_prompt(request, a.failure_report, sections, response);
    t.attempts.push_back(std::move(a));
  }
  t.reason = "not proved after " + std::to_string(max_rewrites) + " rewrites";
  return t;
}

std::string transcript_jsonl(const ProofRequest& request, const GeneratorTranscript& transcript) {
  std::string out;
  for (std::size_t i = 0; i < transcript.attempts.size(); ++i) {
    const auto& a = transcript.attempts[i];
    nlohmann::ordered_json j;
    j["clue_id"] = request.clue.id;
    j["candidate"] = normalize_letters(request.candidate_answer);
    j["sample_index"] = request.sample_index;
    j["attempt"] = i;
    j["prompt"] = a.prompt;
    j["response"] = a.response;
    j["status"] = std::string(to_string(a.outcome.status));
    j["failure_report"] = a.failure_report;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace cryptic
