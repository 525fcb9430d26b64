#include "cryptic/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "cryptic/dataset.hpp"

namespace cryptic {

using namespace node;
using nlohmann::ordered_json;

std::string to_json_line(const SolveRecord& r) {
  ordered_json j;
  j["clue_id"] = r.clue_id;
  j["candidate"] = r.candidate;
  j["is_ground_truth"] = r.is_ground_truth;
  j["sample_index"] = r.sample_index;
  if (r.rewrites) {
    j["rewrites"] = *r.rewrites;
  } else {
    j["rewrites"] = "FAIL";
  }
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j.dump();
}

SolveRecord record_from_json(std::string_view line) {
  SolveRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.clue_id = j.at("clue_id").get<std::string>();
    r.candidate = j.at("candidate").get<std::string>();
    r.is_ground_truth = j.at("is_ground_truth").get<bool>();
    r.sample_index = j.at("sample_index").get<int>();
    const auto& rw = j.at("rewrites");
    if (rw.is_string()) {
      if (rw.get<std::string>() != "FAIL") throw Error("rewrites must be an integer or \"FAIL\"");
    } else {
      const int n = rw.get<int>();
      if (n < 0 || n > kDefaultRewriteCap) throw Error("rewrites out of range: " + std::to_string(n));
      r.rewrites = n;
    }
    if (j.contains("reason")) r.reason = j["reason"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad solve record: ") + e.what());
  }
  return r;
}

std::vector<SolveRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open results file " + path.string());
  std::vector<SolveRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(record_from_json(line));
  }
  return out;
}

// ------------------------------------------------------------ annotations

namespace {

std::string reversed(std::string s) {
  std::reverse(s.begin(), s.end());
  return s;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

WordplayNode substitute(const WordplayNode& n, const std::string& seg) {
  return std::visit(
      [&](const auto& v) -> WordplayNode {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return Literal{seg};
        } else if constexpr (std::is_same_v<T, SynonymOf>) {
          return SynonymOf{v.phrase, seg};
        } else if constexpr (std::is_same_v<T, AbbrevOf>) {
          return AbbrevOf{v.phrase, seg};
        } else if constexpr (std::is_same_v<T, Anagram>) {
          return Anagram{substitute(*v.source, seg), v.indicator, seg};
        } else if constexpr (std::is_same_v<T, Reversal>) {
          return Reversal{substitute(*v.source, reversed(seg)), v.indicator};
        } else if constexpr (std::is_same_v<T, Deletion>) {
          const std::size_t off = std::min(v.offset, seg.size());
          Deletion d = v;
          d.offset = off;
          d.source = substitute(*v.source, seg.substr(0, off) + v.removed + seg.substr(off));
          return d;
        } else if constexpr (std::is_same_v<T, Initials>) {
          return SynonymOf{join_words(v.phrases), seg};
        } else if constexpr (std::is_same_v<T, Hidden>) {
          return SynonymOf{v.host_text, seg};
        } else if constexpr (std::is_same_v<T, Container>) {
          const std::size_t li = surface_letters(*v.inner).size();
          const std::size_t s = std::min<std::size_t>(static_cast<std::size_t>(v.outer_split), seg.size());
          if (s + li > seg.size()) throw Error("decoy is too short for the container");
          Container c = v;
          c.inner = substitute(*v.inner, seg.substr(s, li));
          c.outer = substitute(*v.outer, seg.substr(0, s) + seg.substr(s + li));
          return c;
        } else if constexpr (std::is_same_v<T, Homophone>) {
          Homophone h = v;
          h.letters = seg;
          return h;
        } else if constexpr (std::is_same_v<T, DoubleDefinition>) {
          return DoubleDefinition{seg};
        } else {
          Sequence out;
          std::size_t offset = 0;
          for (std::size_t i = 0; i < v.parts.size(); ++i) {
            const bool last = i + 1 == v.parts.size();
            std::size_t len = surface_letters(v.parts[i]).size();
            if (last || offset + len > seg.size()) len = seg.size() - std::min(offset, seg.size());
            out.parts.push_back(substitute(v.parts[i], seg.substr(std::min(offset, seg.size()), len)));
            offset += len;
          }
          return out;
        }
      },
      n.value);
}

}  // namespace

std::string decoy_wordplay(const WordplayNode& gold, const std::string& letters) {
  const std::string seg = normalize_letters(letters);
  if (auto len = known_length(gold); len && *len != seg.size()) {
    throw Error("decoy '" + seg + "' has " + std::to_string(seg.size()) + " letters, wordplay yields " +
                std::to_string(*len));
  }
  return render_wordplay(substitute(gold, seg));
}

Annotation GoldAnnotations::annotate(const Clue& clue, const std::string& candidate, bool is_ground_truth,
                                     int) const {
  if (!clue.gold_wordplay) throw Error("clue " + clue.id + " has no gold wordplay");
  Annotation a;
  a.definition = clue.gold_definition.value_or(clue.surface);
  if (is_ground_truth) {
    a.wordplay = *clue.gold_wordplay;
    return a;
  }
  ParseOptions opts;
  opts.lexicon = lexicon_.get();
  opts.answer = clue.gold_answer;
  a.wordplay = decoy_wordplay(parse_wordplay(*clue.gold_wordplay, opts), candidate);
  return a;
}

namespace {
std::string annotation_key(const std::string& clue_id, const std::string& candidate, int sample) {
  return clue_id + "\t" + normalize_letters(candidate) + "\t" + std::to_string(sample);
}
}  // namespace

FileAnnotations FileAnnotations::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotation file " + path.string());
  FileAnnotations f;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      f.rows_[annotation_key(j.at("clue_id").get<std::string>(), j.at("candidate").get<std::string>(),
                             j.value("sample_index", 0))] = {j.at("definition").get<std::string>(),
                                                             j.at("wordplay").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return f;
}

Annotation FileAnnotations::annotate(const Clue& clue, const std::string& candidate, bool, int sample) const {
  auto it = rows_.find(annotation_key(clue.id, candidate, sample));
  if (it == rows_.end()) {
    throw Error("no annotation for " + clue.id + " / " + candidate + " sample " + std::to_string(sample));
  }
  return it->second;
}

// -------------------------------------------------------------- running

std::string pick_decoy(const Clue& clue, const EmbeddingTable& table, std::span<const std::string> wordlist) {
  if (!clue.gold_answer) throw Error("clue " + clue.id + " has no gold answer");
  if (!clue.gold_definition) throw Error("clue " + clue.id + " has no definition span");
  const auto spans = extract_definition(*clue.gold_definition).spans;
  if (spans.empty()) throw Error("clue " + clue.id + " has no definition span");
  return closest_candidates(spans.front().text, clue.pattern, *clue.gold_answer, table, wordlist, 1).front().word;
}

namespace {

struct ClueResult {
  std::vector<SolveRecord> records;
  std::string transcripts;
};

ClueResult run_clue(const Clue& clue, const ExperimentConfig& config, const ExperimentInputs& in) {
  ClueResult out;
  const int samples = config.samples_per_candidate;
  auto fail_all = [&](const std::string& candidate, bool gt, const std::string& reason) {
    for (int s = 0; s < samples; ++s) out.records.push_back({clue.id, candidate, gt, s, std::nullopt, reason});
  };

  if (!clue.gold_answer) {
    fail_all("", true, "clue has no gold answer");
    fail_all("", false, "clue has no gold answer");
    return out;
  }
  const std::string truth = normalize_letters(*clue.gold_answer);
  std::optional<std::string> decoy;
  std::string decoy_reason;
  try {
    decoy = pick_decoy(clue, *in.table, in.wordlist);
  } catch (const Error& e) {
    decoy_reason = std::string("decoy generation failed: ") + e.what();
  }

  auto run_candidate = [&](const std::string& candidate, bool gt) {
    for (int s = 0; s < samples; ++s) {
      SolveRecord rec{clue.id, candidate, gt, s, std::nullopt, ""};
      try {
        const Annotation a = in.annotations->annotate(clue, candidate, gt, s);
        ProofRequest req{clue, candidate, a.definition, a.wordplay, s};
        const auto t = prove_with_rewrites(req, *in.generator, *in.oracles, *in.prompts, config.max_rewrites);
        rec.rewrites = t.rewrites_used;
        if (!t.solved() && t.attempts.size() < static_cast<std::size_t>(config.max_rewrites) + 1) {
          rec.reason = t.reason;
        }
        if (!config.transcripts_path.empty()) out.transcripts += transcript_jsonl(req, t);
      } catch (const Error& e) {
        rec.reason = e.what();
      }
      out.records.push_back(std::move(rec));
    }
  };

  run_candidate(truth, true);
  if (decoy) {
    run_candidate(*decoy, false);
  } else {
    fail_all("", false, decoy_reason);
  }
  return out;
}

void append_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || text.empty()) return;
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  f.flush();
}

}  // namespace

std::vector<SolveRecord> run_experiment(const std::vector<Clue>& clues, const ExperimentConfig& config,
                                        const ExperimentInputs& inputs) {
  if (!inputs.annotations || !inputs.generator || !inputs.oracles || !inputs.table || !inputs.prompts) {
    throw Error("run_experiment: missing input");
  }
  if (config.samples_per_candidate < 1) throw Error("samples per candidate must be >= 1");
  const std::size_t per_clue = 2 * static_cast<std::size_t>(config.samples_per_candidate);

  // Resume: keep the records of clues that finished, drop partial ones.
  std::map<std::string, std::vector<SolveRecord>> done;
  if (config.resume && !config.results_path.empty() && std::filesystem::exists(config.results_path)) {
    std::map<std::string, std::vector<SolveRecord>> by_clue;
    for (auto& r : load_records(config.results_path)) by_clue[r.clue_id].push_back(std::move(r));
    for (auto& [id, recs] : by_clue) {
      if (recs.size() == per_clue) done.emplace(id, std::move(recs));
    }
  }
  if (!config.results_path.empty()) {
    std::ofstream f(config.results_path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + config.results_path.string());
    for (const auto& c : clues) {
      if (auto it = done.find(c.id); it != done.end()) {
        for (const auto& r : it->second) f << to_json_line(r) << "\n";
      }
    }
  }
  if (!config.transcripts_path.empty() && !config.resume) {
    std::ofstream(config.transcripts_path, std::ios::binary | std::ios::trunc);
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < clues.size(); ++i) {
    if (!done.count(clues[i].id)) todo.push_back(i);
  }

  std::vector<std::optional<ClueResult>> results(todo.size());
  std::mutex mu;
  std::size_t next_write = 0;
  std::atomic<std::size_t> next_task{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next_task.fetch_add(1);
      if (k >= todo.size()) return;
      ClueResult r = run_clue(clues[todo[k]], config, inputs);
      std::lock_guard lock(mu);
      results[k] = std::move(r);
      // Single ordered writer: flush every finished prefix in clue order.
      while (next_write < results.size() && results[next_write]) {
        std::string lines;
        for (const auto& rec : results[next_write]->records) lines += to_json_line(rec) + "\n";
        append_text(config.results_path, lines);
        append_text(config.transcripts_path, results[next_write]->transcripts);
        ++next_write;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.concurrency, static_cast<int>(todo.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<SolveRecord> all;
  std::size_t k = 0;
  for (std::size_t i = 0; i < clues.size(); ++i) {
    if (auto it = done.find(clues[i].id); it != done.end()) {
      all.insert(all.end(), it->second.begin(), it->second.end());
    } else {
      auto& recs = results[k++]->records;
      all.insert(all.end(), recs.begin(), recs.end());
    }
  }
  return all;
}

// -------------------------------------------------------------- scoring

int score_completed(std::span<const Rewrites> rewrites) {
  return static_cast<int>(std::count_if(rewrites.begin(), rewrites.end(), [](const Rewrites& r) { return r.has_value(); }));
}

int score_fastest(std::span<const Rewrites> rewrites) {
  int best = kFailScore;
  for (const auto& r : rewrites) {
    if (r) best = std::min(best, *r);
  }
  return best;
}

double score_mean(std::span<const Rewrites> rewrites) {
  if (rewrites.empty()) throw Error("score_mean needs at least one record");
  int total = 0;
  for (const auto& r : rewrites) total += r ? *r : kFailScore;
  return static_cast<double>(total) / static_cast<double>(rewrites.size());
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::CompletedProofs: return "COMPLETED_PROOFS";
    case Method::FastestSolve: return "FASTEST_SOLVE";
    case Method::MeanSolveTime: return "MEAN_SOLVE_TIME";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::TruePos: return "TRUE_POS";
    case Outcome::Draw: return "DRAW";
    case Outcome::FalseNeg: return "FALSE_NEG";
  }
  return "?";
}

Outcome classify_scores(double ground_truth, double decoy, Method method) {
  if (ground_truth == decoy) return Outcome::Draw;
  const bool higher_wins = method == Method::CompletedProofs;
  const bool gt_better = higher_wins ? ground_truth > decoy : ground_truth < decoy;
  return gt_better ? Outcome::TruePos : Outcome::FalseNeg;
}

namespace {
double score(std::span<const Rewrites> r, Method m) {
  switch (m) {
    case Method::CompletedProofs: return score_completed(r);
    case Method::FastestSolve: return score_fastest(r);
    case Method::MeanSolveTime: return score_mean(r);
  }
  return 0;
}
}  // namespace

QuestionComparison classify(std::span<const SolveRecord> clue_records, Method method) {
  if (clue_records.empty()) throw MissingCandidate("no records");
  const std::string& id = clue_records.front().clue_id;
  std::vector<Rewrites> gt, decoy;
  for (const auto& r : clue_records) {
    if (r.clue_id != id) throw Error("records for several clues passed to classify");
    (r.is_ground_truth ? gt : decoy).push_back(r.rewrites);
  }
  if (gt.empty()) throw MissingCandidate("clue " + id + " has no ground-truth records");
  if (decoy.empty()) throw MissingCandidate("clue " + id + " has no decoy records");
  return {id, method, classify_scores(score(gt, method), score(decoy, method), method)};
}

std::vector<QuestionComparison> compare_all(std::span<const SolveRecord> records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<SolveRecord>> by_clue;
  for (const auto& r : records) {
    auto [it, fresh] = by_clue.try_emplace(r.clue_id);
    if (fresh) order.push_back(r.clue_id);
    it->second.push_back(r);
  }
  std::vector<QuestionComparison> out;
  for (const auto& id : order) {
    for (Method m : kAllMethods) out.push_back(classify(by_clue[id], m));
  }
  return out;
}

std::vector<TableRow> tabulate(std::span<const QuestionComparison> comparisons) {
  if (comparisons.empty()) throw Error("tabulate needs at least one comparison");
  std::vector<TableRow> rows;
  for (Method m : kAllMethods) {
    TableRow row{m};
    for (const auto& c : comparisons) {
      if (c.method != m) continue;
      ++row.total;
      if (c.outcome == Outcome::TruePos) ++row.count_true_pos;
      if (c.outcome == Outcome::Draw) ++row.count_draw;
      if (c.outcome == Outcome::FalseNeg) ++row.count_false_neg;
    }
    if (row.total == 0) continue;
    auto pct = [&](int n) { return (200 * n + row.total) / (2 * row.total); };
    row.true_pos = pct(row.count_true_pos);
    row.draw = pct(row.count_draw);
    row.false_neg = pct(row.count_false_neg);
    rows.push_back(row);
  }
  return rows;
}

std::string render_table(std::span<const TableRow> rows) {
  auto label = [](Method m) {
    switch (m) {
      case Method::CompletedProofs: return "Completed proofs";
      case Method::FastestSolve: return "Fastest solve";
      case Method::MeanSolveTime: return "Mean solve time";
    }
    return "?";
  };
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %14s %6s %15s %6s\n", "Method", "True Positive", "Draw", "False Negative",
                "N");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-18s %13d%% %5d%% %14d%% %6d\n", label(r.method), r.true_pos, r.draw,
                  r.false_neg, r.total);
    out += buf;
  }
  return out;
}

std::string table_json(std::span<const TableRow> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["method"] = std::string(to_string(r.method));
    j["true_pos"] = r.true_pos;
    j["draw"] = r.draw;
    j["false_neg"] = r.false_neg;
    j["counts"] = {{"true_pos", r.count_true_pos}, {"draw", r.count_draw}, {"false_neg", r.count_false_neg}};
    j["total"] = r.total;
    arr.push_back(j);
  }
  return arr.dump();
}

}  // namespace cryptic
