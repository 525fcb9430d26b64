// Proof construction: wordplay trees compiled to proof scripts, prompts for
// external proof generators, and the bounded rewrite loop.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cryptic/core.hpp"
#include "cryptic/notation.hpp"
#include "cryptic/oracles.hpp"
#include "cryptic/verifier.hpp"

namespace cryptic {

class ProofGenerator;

struct ProofRequest {
  Clue clue;
  std::string candidate_answer;
  std::string definition;  // clue surface with `{}` spans
  std::string wordplay;
  int sample_index = 0;
};

class UnsupportedNode : public Error {
 public:
  using Error::Error;
};

ProofScript compile_wordplay(const WordplayNode& node, const ProofRequest& request);

/// Parses the request's wordplay against its candidate answer, then compiles.
ProofScript compile_request(const ProofRequest& request, const Lexicon* lexicon);

/// Prompt section texts, read from `preamble.txt`, `many_shot.txt`,
/// `functions.txt`, `few_shot.txt` and `instruction.txt`.
struct PromptSections {
  std::string preamble;
  std::string many_shot;
  std::string functions;
  std::string few_shot;
  std::string instruction;

  static PromptSections load(const std::filesystem::path& dir);
};

/// The `def proof(...)` stub with its docstring, as the final prompt block.
std::string render_request_stub(const ProofRequest& request);

/// First attempt when `failure_report` is absent or empty; otherwise a
/// rewrite prompt carrying the previous response and its report.
std::string build_prompt(const ProofRequest& request, const std::optional<std::string>& failure_report,
                         const PromptSections& sections, const std::string& previous_response = {});

struct Attempt {
  std::string prompt;
  std::string response;
  VerificationOutcome outcome;
  std::string failure_report;  // empty when proved
};

struct GeneratorTranscript {
  std::vector<Attempt> attempts;
  std::optional<int> rewrites_used;  // nullopt is FAIL
  std::string reason;                // why a FAIL stopped early, if it did

  bool solved() const { return rewrites_used.has_value(); }
};

inline constexpr int kDefaultRewriteCap = 5;

GeneratorTranscript prove_with_rewrites(const ProofRequest& request, ProofGenerator& generator,
                                        const Oracles& oracles, const PromptSections& sections,
                                        int max_rewrites = kDefaultRewriteCap);

/// One JSON object per attempt: clue_id, candidate, sample_index, attempt,
/// prompt, response, status, failure_report.
std::string transcript_jsonl(const ProofRequest& request, const GeneratorTranscript& transcript);

}  // namespace cryptic
