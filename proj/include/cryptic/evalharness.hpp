// Ground truth versus close decoy: run every (clue, candidate, sample)
// through the rewrite loop, then score and tabulate provability wins.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cryptic/candidates.hpp"
#include "cryptic/core.hpp"
#include "cryptic/formalize.hpp"
#include "cryptic/generators.hpp"
#include "cryptic/notation.hpp"
#include "cryptic/oracles.hpp"

namespace cryptic {

/// Rewrites needed for a proof; nullopt is FAIL.
using Rewrites = std::optional<int>;
inline constexpr int kFailScore = 6;

struct SolveRecord {
  std::string clue_id;
  std::string candidate;
  bool is_ground_truth = false;
  int sample_index = 0;
  Rewrites rewrites;
  std::string reason;  // set for FAIL records that never reached the loop
  bool operator==(const SolveRecord&) const = default;
};

std::string to_json_line(const SolveRecord& record);
SolveRecord record_from_json(std::string_view line);
std::vector<SolveRecord> load_records(const std::filesystem::path& path);

struct Annotation {
  std::string definition;
  std::string wordplay;
};

class AnnotationSource {
 public:
  virtual ~AnnotationSource() = default;
  /// Throws Error when no annotation exists; the sample is then a FAIL.
  virtual Annotation annotate(const Clue& clue, const std::string& candidate, bool is_ground_truth,
                              int sample_index) const = 0;
};

/// Reuses the dataset annotation for the ground truth. Decoys get the gold
/// tree with decoy letters substituted into its leaves.
class GoldAnnotations : public AnnotationSource {
 public:
  explicit GoldAnnotations(std::shared_ptr<const Lexicon> lexicon) : lexicon_(std::move(lexicon)) {}
  Annotation annotate(const Clue& clue, const std::string& candidate, bool is_ground_truth,
                      int sample_index) const override;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
};

/// JSON lines with clue_id, candidate, sample_index, definition, wordplay.
class FileAnnotations : public AnnotationSource {
 public:
  static FileAnnotations load(const std::filesystem::path& path);
  Annotation annotate(const Clue& clue, const std::string& candidate, bool is_ground_truth,
                      int sample_index) const override;

 private:
  std::map<std::string, Annotation> rows_;
};

/// Re-renders `gold` so that it yields `letters` of the same length,
/// keeping glosses and indicators. Index-style nodes (initials, hidden
/// words) become synonym leaves because their letters are fixed by text.
std::string decoy_wordplay(const WordplayNode& gold, const std::string& letters);

struct ExperimentConfig {
  int samples_per_candidate = 5;
  int max_rewrites = kDefaultRewriteCap;
  int concurrency = 1;
  std::filesystem::path results_path;      // JSON lines; empty keeps results in memory
  std::filesystem::path transcripts_path;  // JSON lines; empty skips transcripts
  bool resume = false;
};

struct ExperimentInputs {
  const AnnotationSource* annotations = nullptr;
  ProofGenerator* generator = nullptr;
  const Oracles* oracles = nullptr;
  const EmbeddingTable* table = nullptr;
  std::span<const std::string> wordlist;
  const PromptSections* prompts = nullptr;
};

/// Decoy: top-ranked close candidate for the first definition span.
std::string pick_decoy(const Clue& clue, const EmbeddingTable& table, std::span<const std::string> wordlist);

std::vector<SolveRecord> run_experiment(const std::vector<Clue>& clues, const ExperimentConfig& config,
                                        const ExperimentInputs& inputs);

int score_completed(std::span<const Rewrites> rewrites);
int score_fastest(std::span<const Rewrites> rewrites);
double score_mean(std::span<const Rewrites> rewrites);

enum class Method { CompletedProofs, FastestSolve, MeanSolveTime };
enum class Outcome { TruePos, Draw, FalseNeg };
inline constexpr Method kAllMethods[] = {Method::CompletedProofs, Method::FastestSolve, Method::MeanSolveTime};

std::string_view to_string(Method m);
std::string_view to_string(Outcome o);

class MissingCandidate : public Error {
 public:
  using Error::Error;
};

struct QuestionComparison {
  std::string clue_id;
  Method method;
  Outcome outcome;
  bool operator==(const QuestionComparison&) const = default;
};

/// Compares two scores under a method's ordering.
Outcome classify_scores(double ground_truth, double decoy, Method method);

/// Records for one clue, both candidates.
QuestionComparison classify(std::span<const SolveRecord> clue_records, Method method);

/// Every (clue, method) comparison, clues in first-seen order.
std::vector<QuestionComparison> compare_all(std::span<const SolveRecord> records);

struct TableRow {
  Method method;
  int true_pos = 0;  // whole percentages, rounded half up
  int draw = 0;
  int false_neg = 0;
  int count_true_pos = 0;
  int count_draw = 0;
  int count_false_neg = 0;
  int total = 0;
  bool operator==(const TableRow&) const = default;
};

/// One row per method present in `comparisons`, in method order.
std::vector<TableRow> tabulate(std::span<const QuestionComparison> comparisons);
std::string render_table(std::span<const TableRow> rows);
std::string table_json(std::span<const TableRow> rows);

}  // namespace cryptic
