#include <doctest.h>

#include <random>
#include <regex>

#include "cryptic/candidates.hpp"
#include "cryptic/evalharness.hpp"
#include "cryptic/generators.hpp"
#include "support.hpp"

using namespace cryptic;

namespace {

const Oracles& oracles() {
  static const Oracles o(testing::seed_lexicon());
  return o;
}

const PromptSections& sections() {
  static const PromptSections s = PromptSections::load(testing::data_dir() / "prompts");
  return s;
}

const EmbeddingTable& desk() {
  static const EmbeddingTable t = load_embeddings(testing::data_dir() / "desk" / "embeddings.txt");
  return t;
}

const std::vector<std::string>& wordlist() {
  static const auto w = load_wordlist(testing::data_dir() / "lexicon" / "wordlist.txt");
  return w;
}

const GoldAnnotations& gold() {
  static const GoldAnnotations g(testing::seed_lexicon());
  return g;
}

ExperimentInputs inputs(ProofGenerator& gen) {
  ExperimentInputs in;
  in.annotations = &gold();
  in.generator = &gen;
  in.oracles = &oracles();
  in.table = &desk();
  in.wordlist = wordlist();
  in.prompts = &sections();
  return in;
}

// Proves whatever answer the prompt asks for.
std::string trivially_proving(const std::string& prompt) {
  const auto req = extract_request(prompt);
  if (!req) return "";
  const std::string a = normalize_letters(req->answer);
  return "proof answer=\"" + a + "\" clue=\"" + req->clue + "\" pattern=\"" + req->pattern + "\"\nassert \"" + a +
         "\" == \"" + a + "\"\n";
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cryptic_eval_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::vector<Rewrites> rw(std::initializer_list<int> xs) {
  std::vector<Rewrites> out;
  for (int x : xs) out.push_back(x < 0 ? Rewrites{} : Rewrites{x});
  return out;
}
constexpr int F = -1;

std::vector<SolveRecord> clue_records(const std::vector<Rewrites>& gt, const std::vector<Rewrites>& decoy) {
  std::vector<SolveRecord> out;
  for (std::size_t i = 0; i < gt.size(); ++i) out.push_back({"q", "GT", true, static_cast<int>(i), gt[i], ""});
  for (std::size_t i = 0; i < decoy.size(); ++i) out.push_back({"q", "DECOY", false, static_cast<int>(i), decoy[i], ""});
  return out;
}

std::string squash(const std::string& s) { return std::regex_replace(s, std::regex(" +"), " "); }

}  // namespace

TEST_CASE("completed proofs score") {
  CHECK(score_completed(rw({0, 2, F, 5, 1})) == 4);
  CHECK(score_completed(rw({F, F, F})) == 0);
  CHECK(score_completed(rw({0, 1, 2, 3, 4})) == 5);
}

TEST_CASE("fastest solve score") {
  CHECK(score_fastest(rw({3, 1, F})) == 1);
  CHECK(score_fastest(rw({F, F})) == 6);
  CHECK(score_fastest(rw({0})) == 0);
}

TEST_CASE("mean solve time score") {
  CHECK(score_mean(rw({1, F, 2})) == 3.0);
  CHECK(score_mean(rw({F, F, F, F, F})) == 6.0);
  CHECK(score_mean(rw({0, 0, 0, 0, 0})) == 0.0);
}

TEST_CASE("score ordering holds on random record sets") {
  std::mt19937 rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<Rewrites> xs(1 + rng() % 6);
    for (auto& x : xs) x = rng() % 7 == 6 ? Rewrites{} : Rewrites{static_cast<int>(rng() % 6)};
    CHECK(score_fastest(xs) <= score_mean(xs));
    CHECK(score_mean(xs) <= 6.0);
  }
}

TEST_CASE("classify examples") {
  const auto completed = clue_records(rw({0, 1, 2, F, F}), rw({0, F, F, F, F}));
  CHECK(classify(completed, Method::CompletedProofs).outcome == Outcome::TruePos);
  const auto fastest = clue_records(rw({2, F}), rw({2, 4}));
  CHECK(classify(fastest, Method::FastestSolve).outcome == Outcome::Draw);
  // Means 4.0 and 2.0.
  const auto mean = clue_records(rw({2, F}), rw({2, 2}));
  CHECK(classify(mean, Method::MeanSolveTime).outcome == Outcome::FalseNeg);
  CHECK(classify(mean, Method::MeanSolveTime).clue_id == "q");
}

TEST_CASE("classify needs both candidates") {
  const auto only_gt = clue_records(rw({0}), {});
  CHECK_THROWS_AS(classify(only_gt, Method::CompletedProofs), MissingCandidate);
  const auto only_decoy = clue_records({}, rw({0}));
  CHECK_THROWS_AS(classify(only_decoy, Method::FastestSolve), MissingCandidate);
}

TEST_CASE("classify is antisymmetric") {
  auto flip = [](Outcome o) {
    return o == Outcome::TruePos ? Outcome::FalseNeg : o == Outcome::FalseNeg ? Outcome::TruePos : Outcome::Draw;
  };
  for (Method m : kAllMethods) {
    for (int a = 0; a <= 6; ++a) {
      for (int b = 0; b <= 6; ++b) {
        CHECK(classify_scores(b, a, m) == flip(classify_scores(a, b, m)));
        CHECK((classify_scores(a, b, m) == Outcome::Draw) == (a == b));
      }
    }
  }
  std::mt19937 rng(9);
  for (int i = 0; i < 300; ++i) {
    std::vector<Rewrites> x(3), y(3);
    for (auto& r : x) r = rng() % 3 == 0 ? Rewrites{} : Rewrites{static_cast<int>(rng() % 6)};
    for (auto& r : y) r = rng() % 3 == 0 ? Rewrites{} : Rewrites{static_cast<int>(rng() % 6)};
    for (Method m : kAllMethods) {
      CHECK(classify(clue_records(y, x), m).outcome == flip(classify(clue_records(x, y), m).outcome));
    }
  }
}

TEST_CASE("table row from the published counts") {
  std::vector<QuestionComparison> cs;
  for (int i = 0; i < 100; ++i) {
    cs.push_back({"c" + std::to_string(i), Method::CompletedProofs,
                  i < 38 ? Outcome::TruePos : i < 97 ? Outcome::Draw : Outcome::FalseNeg});
  }
  const auto rows = tabulate(cs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].true_pos == 38);
  CHECK(rows[0].draw == 59);
  CHECK(rows[0].false_neg == 3);
  CHECK(squash(render_table(rows)).find("Completed proofs 38% 59% 3% 100") != std::string::npos);
}

TEST_CASE("single true positive") {
  const std::vector<QuestionComparison> cs = {{"a", Method::FastestSolve, Outcome::TruePos}};
  const auto rows = tabulate(cs);
  CHECK(squash(render_table(rows)).find("Fastest solve 100% 0% 0% 1") != std::string::npos);
}

TEST_CASE("hand tallied comparisons") {
  // Completed: TP a b c d, DRAW e f g, FN h i j -> 40/30/30.
  // Mean: TP a b, DRAW c, FN none -> 2/3, 1/3 -> 67/33/0.
  // Fastest: one of each -> 33/33/33, sum 99.
  std::vector<QuestionComparison> cs;
  const std::string tp = "abcd", dr = "efg", fn = "hij";
  for (char c : tp) cs.push_back({std::string(1, c), Method::CompletedProofs, Outcome::TruePos});
  for (char c : dr) cs.push_back({std::string(1, c), Method::CompletedProofs, Outcome::Draw});
  for (char c : fn) cs.push_back({std::string(1, c), Method::CompletedProofs, Outcome::FalseNeg});
  cs.push_back({"a", Method::MeanSolveTime, Outcome::TruePos});
  cs.push_back({"b", Method::MeanSolveTime, Outcome::TruePos});
  cs.push_back({"c", Method::MeanSolveTime, Outcome::Draw});
  cs.push_back({"a", Method::FastestSolve, Outcome::TruePos});
  cs.push_back({"b", Method::FastestSolve, Outcome::Draw});
  cs.push_back({"c", Method::FastestSolve, Outcome::FalseNeg});
  const auto rows = tabulate(cs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == TableRow{Method::CompletedProofs, 40, 30, 30, 4, 3, 3, 10});
  CHECK(rows[1] == TableRow{Method::FastestSolve, 33, 33, 33, 1, 1, 1, 3});
  CHECK(rows[2] == TableRow{Method::MeanSolveTime, 67, 33, 0, 2, 1, 0, 3});
  for (const auto& r : rows) {
    CHECK(r.true_pos + r.draw + r.false_neg >= 99);
    CHECK(r.true_pos + r.draw + r.false_neg <= 101);
  }
  const auto j = table_json(rows);
  CHECK(j.find("\"method\":\"COMPLETED_PROOFS\",\"true_pos\":40") != std::string::npos);
}

TEST_CASE("half percentages round up") {
  // 1 of 8 = 12.5%.
  std::vector<QuestionComparison> cs;
  for (int i = 0; i < 8; ++i) cs.push_back({std::to_string(i), Method::CompletedProofs, i == 0 ? Outcome::FalseNeg : Outcome::TruePos});
  const auto rows = tabulate(cs);
  CHECK(rows[0].false_neg == 13);
  CHECK(rows[0].true_pos == 88);
}

TEST_CASE("compare_all keeps clue order") {
  std::vector<SolveRecord> rs;
  for (const char* id : {"z", "a"}) {
    rs.push_back({id, "GT", true, 0, 0, ""});
    rs.push_back({id, "D", false, 0, Rewrites{}, ""});
  }
  const auto cs = compare_all(rs);
  REQUIRE(cs.size() == 6);
  CHECK(cs[0].clue_id == "z");
  CHECK(cs[3].clue_id == "a");
  for (const auto& c : cs) CHECK(c.outcome == Outcome::TruePos);
}

TEST_CASE("record lines round trip") {
  const SolveRecord a{"wordplay-types#0", "ESCORT", true, 2, 3, ""};
  CHECK(to_json_line(a) ==
        "{\"clue_id\":\"wordplay-types#0\",\"candidate\":\"ESCORT\",\"is_ground_truth\":true,\"sample_index\":2,"
        "\"rewrites\":3}");
  const SolveRecord b{"x", "", false, 0, Rewrites{}, "no decoy"};
  CHECK(to_json_line(b).find("\"rewrites\":\"FAIL\",\"reason\":\"no decoy\"") != std::string::npos);
  CHECK(record_from_json(to_json_line(a)) == a);
  CHECK(record_from_json(to_json_line(b)) == b);
  CHECK_THROWS_AS(record_from_json("{\"clue_id\":\"x\",\"candidate\":\"A\",\"is_ground_truth\":true,"
                                   "\"sample_index\":0,\"rewrites\":6}"),
                  Error);
  CHECK_THROWS_AS(record_from_json("{}"), Error);
}

TEST_CASE("decoy wordplay keeps the gold shape") {
  ParseOptions o;
  o.lexicon = testing::seed_lexicon().get();
  CHECK(decoy_wordplay(parse_wordplay("BAN (outlaw) + KING (leader)", o), "LENDING") ==
        "LEN (outlaw) + DING (leader)");
  CHECK(decoy_wordplay(parse_wordplay("(corset)* (*shredded)", o), "CONVOY") == "(CONVOY)* (*shredded) = CONVOY");
  CHECK(decoy_wordplay(parse_wordplay("(LAGER)< (beer, <returned)", o), "ROYAL") == "(LAYOR)< (beer, <returned)");
  CHECK_THROWS_AS(decoy_wordplay(parse_wordplay("BAN (outlaw) + KING (leader)", o), "ROYAL"), Error);
}

TEST_CASE("gold annotations") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  const Clue& banking = clues[1];
  const auto gt = gold().annotate(banking, "BANKING", true, 0);
  CHECK(gt.wordplay == *banking.gold_wordplay);
  CHECK(gt.definition == *banking.gold_definition);
  const auto decoy = gold().annotate(banking, "LENDING", false, 0);
  CHECK(decoy.wordplay == "LEN (outlaw) + DING (leader)");
  Clue bare = banking;
  bare.gold_wordplay.reset();
  CHECK_THROWS_AS(gold().annotate(bare, "BANKING", true, 0), Error);
}

TEST_CASE("decoys come from the definition span") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  const auto ref = testing::RefTable::load(desk().source());
  for (const auto& c : clues) {
    const std::string decoy = pick_decoy(c, desk(), wordlist());
    CAPTURE(c.id);
    CHECK(decoy != *c.gold_answer);
    CHECK(pattern_matches(decoy, c.pattern));
  }
  CHECK(pick_decoy(clues[1], desk(), wordlist()) ==
        closest_candidates("managing money", clues[1].pattern, "BANKING", desk(), wordlist(), 1)[0].word);
}

TEST_CASE("one clue with an always-proving generator") {
  auto clues = testing::clues_from("wordplay_types.yaml");
  clues.resize(1);
  FunctionGenerator gen(trivially_proving);
  ExperimentConfig cfg;
  cfg.samples_per_candidate = 1;
  const auto recs = run_experiment(clues, cfg, inputs(gen));
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].is_ground_truth);
  CHECK(recs[0].candidate == "ESCORT");
  CHECK(recs[0].rewrites == 0);
  CHECK_FALSE(recs[1].is_ground_truth);
  CHECK(recs[1].rewrites == 0);
}

TEST_CASE("clue with no decoy gets reasoned FAIL records") {
  Clue c;
  c.id = "long#0";
  c.surface = "a very long answer";
  c.pattern = Pattern::parse("13");
  c.gold_answer = "ABCDEFGHIJKLM";
  c.gold_definition = "a very {long answer}";
  c.gold_wordplay = "ABCDEFGHIJKLM (a very)";
  FunctionGenerator gen(trivially_proving);
  ExperimentConfig cfg;
  cfg.samples_per_candidate = 2;
  const auto recs = run_experiment({c}, cfg, inputs(gen));
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].rewrites == 0);
  for (int i = 2; i < 4; ++i) {
    CHECK_FALSE(recs[i].is_ground_truth);
    CHECK_FALSE(recs[i].rewrites);
    CHECK_FALSE(recs[i].reason.empty());
  }
}

TEST_CASE("fixture experiment") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  const auto dir = temp_dir("fixture");
  CompilerMock mock(testing::seed_lexicon());
  ExperimentConfig cfg;
  cfg.results_path = dir / "results.jsonl";
  cfg.transcripts_path = dir / "transcripts.jsonl";
  const auto recs = run_experiment(clues, cfg, inputs(mock));
  CHECK(recs.size() == clues.size() * 2 * 5);
  CHECK(load_records(cfg.results_path) == recs);
  for (const auto& r : recs) {
    if (r.is_ground_truth) CHECK(r.rewrites == 0);
  }
  const auto rows = tabulate(compare_all(recs));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].method == Method::CompletedProofs);
  CHECK(rows[0].true_pos >= 75);
  CHECK(rows[0].false_neg == 0);

  SUBCASE("resume on a finished run makes no calls") {
    CompilerMock again(testing::seed_lexicon());
    ExperimentConfig resume = cfg;
    resume.resume = true;
    CHECK(run_experiment(clues, resume, inputs(again)) == recs);
    CHECK(again.calls() == 0);
  }
  SUBCASE("resume after an interruption") {
    const std::string full = testing::read_file(cfg.results_path);
    std::size_t cut = 0;
    for (int i = 0; i < 15; ++i) cut = full.find('\n', cut) + 1;
    std::ofstream(cfg.results_path, std::ios::binary) << full.substr(0, cut);
    CompilerMock again(testing::seed_lexicon());
    ExperimentConfig resume = cfg;
    resume.resume = true;
    CHECK(run_experiment(clues, resume, inputs(again)) == recs);
    CHECK(testing::read_file(cfg.results_path) == full);
    CHECK(again.calls() > 0);
    CHECK(again.calls() < mock.calls());
  }
}

TEST_CASE("concurrent run writes the same file") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  auto run = [&](int workers) {
    const auto dir = temp_dir("conc" + std::to_string(workers));
    CompilerMock mock(testing::seed_lexicon(), 1);
    ExperimentConfig cfg;
    cfg.concurrency = workers;
    cfg.results_path = dir / "results.jsonl";
    cfg.transcripts_path = dir / "transcripts.jsonl";
    run_experiment(clues, cfg, inputs(mock));
    return testing::read_file(cfg.results_path) + testing::read_file(cfg.transcripts_path);
  };
  const std::string one = run(1);
  CHECK(one == run(4));
  CHECK(one == run(1));
}

TEST_CASE("corrupting mock costs one rewrite per ground truth") {
  auto clues = testing::clues_from("wordplay_types.yaml");
  CompilerMock mock(testing::seed_lexicon(), 1);
  ExperimentConfig cfg;
  cfg.samples_per_candidate = 1;
  const auto recs = run_experiment(clues, cfg, inputs(mock));
  for (const auto& r : recs) {
    if (r.is_ground_truth) CHECK(r.rewrites == 1);
  }
}

TEST_CASE("experiment config checks") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  FunctionGenerator gen(trivially_proving);
  ExperimentConfig cfg;
  cfg.samples_per_candidate = 0;
  CHECK_THROWS_AS(run_experiment(clues, cfg, inputs(gen)), Error);
  cfg.samples_per_candidate = 1;
  ExperimentInputs in = inputs(gen);
  in.generator = nullptr;
  CHECK_THROWS_AS(run_experiment(clues, cfg, in), Error);
}
