// cryptic: parse wordplay, verify and formalise proofs, pick decoys, run
// the provability experiment.
//
// Exit codes: 0 success or PROVED, 1 FAILED, 2 parse or configuration error.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cryptic/candidates.hpp"
#include "cryptic/dataset.hpp"
#include "cryptic/evalharness.hpp"
#include "cryptic/formalize.hpp"
#include "cryptic/generators.hpp"
#include "cryptic/lexicon.hpp"
#include "cryptic/notation.hpp"
#include "cryptic/oracles.hpp"
#include "cryptic/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace cryptic;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

class ConfigError : public Error {
 public:
  using Error::Error;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Globals {
  std::string data_dir;
  std::string lexicon_dir;
  std::string embeddings;
  std::string wordlist;
  std::string prompts_dir;
  std::string config_file;
  std::string out_dir = ".";
  bool json = false;
};

// Flags > environment > config file > built-in default.
class Settings {
 public:
  Settings(const CLI::App& app, const Globals& g) : app_(app) {
    if (!g.config_file.empty()) {
      try {
        config_ = nlohmann::json::parse(read_text(g.config_file));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + g.config_file + ": " + e.what());
      }
      if (!config_.is_object()) throw ConfigError("config " + g.config_file + " must be a JSON object");
    }
  }

  template <typename T>
  T get(const CLI::App& sub, const std::string& flag, const T& flag_value, const char* env, const char* key,
        T fallback) const {
    if (given(sub, flag) || given(app_, flag)) return flag_value;
    if (env) {
      if (const char* v = std::getenv(env); v && *v) return from_env<T>(env, v);
    }
    if (key && config_.contains(key)) {
      try {
        return config_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
      }
    }
    return fallback;
  }

  const nlohmann::json& config() const { return config_; }

 private:
  static bool given(const CLI::App& app, const std::string& flag) {
    if (flag.empty()) return false;
    const CLI::Option* o = app.get_option_no_throw(flag);
    return o && o->count() > 0;
  }

  template <typename T>
  static T from_env(const char* name, const char* value) {
    if constexpr (std::is_same_v<T, std::string>) {
      return value;
    } else {
      std::istringstream in(value);
      T out{};
      if (!(in >> out)) throw ConfigError(std::string("environment ") + name + " is not a number: " + value);
      return out;
    }
  }

  const CLI::App& app_;
  nlohmann::json config_;
};

struct Resources {
  fs::path data_dir;
  fs::path lexicon_dir;
  fs::path embeddings;
  fs::path wordlist;
  fs::path prompts_dir;
};

Resources resolve_paths(const CLI::App& app, const CLI::App& sub, const Globals& g, const Settings& s) {
  Resources r;
  r.data_dir = s.get<std::string>(sub, "--data-dir", g.data_dir, "CRYPTIC_DATA_DIR", "data_dir",
                                  default_data_dir().string());
  r.lexicon_dir = s.get<std::string>(sub, "--lexicon", g.lexicon_dir, "CRYPTIC_LEXICON", "lexicon_dir",
                                     (r.data_dir / "lexicon").string());
  r.embeddings = s.get<std::string>(sub, "--embeddings", g.embeddings, "CRYPTIC_EMBEDDINGS", "embeddings",
                                    (r.data_dir / "desk" / "embeddings.txt").string());
  r.wordlist = s.get<std::string>(sub, "--wordlist", g.wordlist, "CRYPTIC_WORDLIST", "wordlist",
                                  (r.lexicon_dir / "wordlist.txt").string());
  r.prompts_dir = s.get<std::string>(sub, "--prompts", g.prompts_dir, "CRYPTIC_PROMPTS", "prompts_dir",
                                     (r.data_dir / "prompts").string());
  (void)app;
  return r;
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw ConfigError(std::string(what) + " directory not found: " + p.string());
}
void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
}

std::shared_ptr<const Lexicon> load_lexicon(const Resources& r) {
  require_dir(r.lexicon_dir, "lexicon");
  return std::make_shared<const Lexicon>(Lexicon::load_directory(r.lexicon_dir));
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

ordered_json outcome_json(const VerificationOutcome& o) {
  ordered_json j;
  j["status"] = std::string(to_string(o.status));
  j["failures"] = ordered_json::array();
  for (const auto& f : o.failures) {
    j["failures"].push_back({{"statement", f.statement_index}, {"message", f.message}, {"hint", f.hint}});
  }
  j["lints"] = ordered_json::array();
  for (const auto& l : o.lints) {
    j["lints"].push_back({{"kind", std::string(to_string(l.kind))},
                          {"severity", std::string(to_string(l.severity))},
                          {"detail", l.detail}});
  }
  if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
  return j;
}

int exit_for(const VerificationOutcome& o) {
  switch (o.status) {
    case Status::Proved: return kOk;
    case Status::Failed: return kFailed;
    case Status::ParseError: return kUsage;
  }
  return kUsage;
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::vector<Clue> load_clues(const std::vector<std::string>& files) {
  std::vector<Clue> clues;
  for (const auto& f : files) {
    require_file(f, "puzzle");
    for (auto& doc : load_puzzles(f)) {
      for (auto& c : doc.clues) clues.push_back(std::move(c));
    }
  }
  return clues;
}

// ------------------------------------------------------------ parse

struct ParseArgs {
  std::string annotation;
  std::string file;
  std::string answer;
};

int cmd_parse(const ParseArgs& a, const Globals& g, const Resources& r) {
  std::vector<std::string> inputs;
  if (!a.file.empty()) {
    std::istringstream in(read_text(a.file));
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) inputs.push_back(trim(line));
    }
  } else if (!a.annotation.empty()) {
    inputs.push_back(a.annotation);
  } else {
    throw ConfigError("parse needs an annotation or --file");
  }
  std::shared_ptr<const Lexicon> lexicon;
  if (fs::is_directory(r.lexicon_dir)) lexicon = load_lexicon(r);
  ParseOptions opts;
  opts.lexicon = lexicon.get();
  if (!a.answer.empty()) opts.answer = normalize_letters(a.answer);

  int code = kOk;
  ordered_json results = ordered_json::array();
  for (const auto& text : inputs) {
    try {
      const WordplayNode node = parse_wordplay(text, opts);
      if (g.json) {
        results.push_back({{"input", text}, {"rendered", render_wordplay(node)}, {"letters", surface_letters(node)}});
      } else {
        std::cout << describe(node) << surface_letters(node) << "\n";
      }
    } catch (const ParseError& e) {
      code = kUsage;
      std::cerr << "parse error: " << e.what() << "\n";
      if (g.json) results.push_back({{"input", text}, {"error", e.what()}});
    }
  }
  if (g.json) print_json(inputs.size() == 1 && a.file.empty() ? results.front() : results);
  return code;
}

// ------------------------------------------------------------ verify

int cmd_verify(const std::string& file, const Globals& g, const Resources& r) {
  const std::string script = read_text(file);
  Oracles oracles(load_lexicon(r));
  const VerificationOutcome o = verify_script(script, oracles);
  if (g.json) {
    ordered_json j = outcome_json(o);
    if (!o.proved()) j["report"] = render_failure_report(o);
    print_json(j);
  } else {
    std::cout << to_string(o.status) << "\n";
    for (const auto& l : o.lints) {
      if (l.severity == Severity::Warn) std::cout << "warning: " << to_string(l.kind) << ": " << l.detail << "\n";
    }
    if (!o.proved()) std::cout << render_failure_report(o);
  }
  return exit_for(o);
}

// ------------------------------------------------------------ formalize

struct FormalizeArgs {
  std::string wordplay;
  std::string answer;
  std::string clue;
  std::string pattern;
  std::string definition;
  std::string puzzles;
  int index = -1;
  bool check = false;
  bool prompt = false;
};

int cmd_formalize(const FormalizeArgs& a, const Globals& g, const Resources& r) {
  auto lexicon = load_lexicon(r);
  std::vector<ProofRequest> requests;
  if (!a.puzzles.empty()) {
    const auto clues = load_clues({a.puzzles});
    for (std::size_t i = 0; i < clues.size(); ++i) {
      if (a.index >= 0 && static_cast<std::size_t>(a.index) != i) continue;
      const Clue& c = clues[i];
      if (!c.gold_answer || !c.gold_wordplay) throw ConfigError("clue " + c.id + " lacks an answer or wordplay");
      requests.push_back({c, *c.gold_answer, c.gold_definition.value_or(c.surface), *c.gold_wordplay, 0});
    }
    if (requests.empty()) throw ConfigError("no clue selected from " + a.puzzles);
  } else {
    if (a.wordplay.empty() || a.answer.empty()) throw ConfigError("formalize needs --wordplay and --answer");
    ProofRequest req;
    req.clue.id = "cli";
    req.clue.surface = a.clue.empty() ? extract_definition(a.definition).plain : a.clue;
    const std::string pattern =
        a.pattern.empty() ? std::to_string(normalize_letters(a.answer).size()) : a.pattern;
    req.clue.pattern = Pattern::parse(pattern);
    req.candidate_answer = normalize_letters(a.answer);
    req.definition = a.definition;
    req.wordplay = a.wordplay;
    requests.push_back(std::move(req));
  }

  Oracles oracles(lexicon);
  std::optional<PromptSections> sections;
  if (a.prompt) {
    require_dir(r.prompts_dir, "prompts");
    sections = PromptSections::load(r.prompts_dir);
  }
  int code = kOk;
  ordered_json results = ordered_json::array();
  for (const auto& req : requests) {
    ordered_json j;
    j["clue_id"] = req.clue.id;
    j["answer"] = normalize_letters(req.candidate_answer);
    try {
      const ProofScript proof = compile_request(req, lexicon.get());
      const std::string text = render_proof(proof);
      j["proof"] = text;
      if (!g.json) std::cout << text;
      if (a.check) {
        const auto o = verify(proof, oracles);
        j["outcome"] = outcome_json(o);
        if (!g.json) std::cout << "# " << to_string(o.status) << "\n";
        code = std::max(code, exit_for(o));
      }
    } catch (const Error& e) {
      code = kUsage;
      j["error"] = e.what();
      std::cerr << req.clue.id << ": " << e.what() << "\n";
    }
    if (sections) {
      j["prompt"] = build_prompt(req, std::nullopt, *sections);
      if (!g.json) std::cout << "\n" << j["prompt"].get<std::string>();
    }
    if (!g.json && requests.size() > 1) std::cout << "\n";
    results.push_back(std::move(j));
  }
  if (g.json) print_json(results.size() == 1 ? results.front() : results);
  return code;
}

// ------------------------------------------------------------ candidates

struct CandidateArgs {
  std::string span;
  std::string pattern;
  std::string exclude;
  int k = 5;
};

int cmd_candidates(const CandidateArgs& a, const Globals& g, const Resources& r) {
  require_file(r.embeddings, "embedding");
  require_file(r.wordlist, "wordlist");
  if (a.k < 1) throw ConfigError("-k must be >= 1");
  const auto table = load_embeddings(r.embeddings);
  const auto words = load_wordlist(r.wordlist);
  const auto ranked =
      closest_candidates(a.span, Pattern::parse(a.pattern), a.exclude, table, words, static_cast<std::size_t>(a.k));
  if (g.json) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : ranked) arr.push_back({{"word", c.word}, {"similarity", c.similarity}});
    print_json(arr);
  } else {
    for (const auto& c : ranked) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", c.similarity);
      std::cout << c.word << "\t" << buf << "\n";
    }
  }
  return kOk;
}

// ------------------------------------------------------------ experiment

struct ExperimentArgs {
  std::vector<std::string> puzzles;
  std::string generator = "mock";
  std::string replay;
  std::string annotations;
  std::string model;
  std::string endpoint;
  int samples = 5;
  int max_rewrites = kDefaultRewriteCap;
  int concurrency = 1;
  int corrupt = 0;
  bool resume = false;
};

void emit_table(const std::vector<TableRow>& rows, const Globals& g) {
  if (g.json) {
    print_json(ordered_json::parse(table_json(rows)));
  } else {
    std::cout << render_table(rows);
  }
}

int cmd_experiment(const CLI::App& sub, const ExperimentArgs& a, const Globals& g, const Resources& r,
                   const Settings& s) {
  ExperimentConfig config;
  config.samples_per_candidate = s.get<int>(sub, "--samples", a.samples, "CRYPTIC_SAMPLES", "samples", 5);
  config.max_rewrites =
      s.get<int>(sub, "--max-rewrites", a.max_rewrites, "CRYPTIC_MAX_REWRITES", "max_rewrites", kDefaultRewriteCap);
  config.concurrency = s.get<int>(sub, "--concurrency", a.concurrency, "CRYPTIC_CONCURRENCY", "concurrency", 1);
  config.resume = a.resume;
  const std::string generator =
      s.get<std::string>(sub, "--generator", a.generator, "CRYPTIC_GENERATOR", "generator", "mock");
  const int corrupt = s.get<int>(sub, "--corrupt", a.corrupt, nullptr, "corrupt_first_n", 0);
  auto puzzles = a.puzzles;
  if (puzzles.empty() && s.config().contains("puzzles")) {
    puzzles = s.config()["puzzles"].get<std::vector<std::string>>();
  }
  if (puzzles.empty()) puzzles.push_back((r.data_dir / "fixtures" / "wordplay_types.yaml").string());
  if (config.max_rewrites < 0) throw ConfigError("rewrite cap must be >= 0");
  if (config.samples_per_candidate < 1) throw ConfigError("samples must be >= 1");

  require_file(r.embeddings, "embedding");
  require_file(r.wordlist, "wordlist");
  require_dir(r.prompts_dir, "prompts");
  auto lexicon = load_lexicon(r);
  const auto clues = load_clues(puzzles);
  const auto table = load_embeddings(r.embeddings);
  const auto words = load_wordlist(r.wordlist);
  const auto prompts = PromptSections::load(r.prompts_dir);
  Oracles oracles(lexicon);

  std::unique_ptr<ProofGenerator> gen;
  if (generator == "mock") {
    gen = std::make_unique<CompilerMock>(lexicon, corrupt);
  } else if (generator == "replay") {
    const std::string replay = s.get<std::string>(sub, "--replay", a.replay, "CRYPTIC_REPLAY", "replay", "");
    if (replay.empty()) throw ConfigError("--generator replay needs --replay FILE");
    require_file(replay, "replay");
    gen = ReplayMock::load(replay);
  } else if (generator == "live") {
    ChatConfig chat;
    chat.model = s.get<std::string>(sub, "--model", a.model, "CRYPTIC_MODEL", "model", "");
    chat.endpoint = s.get<std::string>(sub, "--endpoint", a.endpoint, "CRYPTIC_ENDPOINT", "endpoint", chat.endpoint);
    chat.api_key_env = s.get<std::string>(sub, "", std::string(), nullptr, "api_key_env", chat.api_key_env);
    chat.temperature = s.get<double>(sub, "", 0.0, nullptr, "temperature", chat.temperature);
    chat.max_tokens = s.get<int>(sub, "", 0, nullptr, "max_tokens", chat.max_tokens);
    chat.concurrency = std::max(1, config.concurrency);
    gen = std::make_unique<HttpChatGenerator>(chat);
  } else {
    throw ConfigError("unknown generator '" + generator + "' (mock, replay or live)");
  }

  std::unique_ptr<AnnotationSource> annotations;
  const std::string ann_file = s.get<std::string>(sub, "--annotations", a.annotations, nullptr, "annotations", "");
  if (!ann_file.empty()) {
    require_file(ann_file, "annotation");
    annotations = std::make_unique<FileAnnotations>(FileAnnotations::load(ann_file));
  } else {
    annotations = std::make_unique<GoldAnnotations>(lexicon);
  }

  config.results_path = out_path(g, "results.jsonl");
  config.transcripts_path = out_path(g, "transcripts.jsonl");
  ExperimentInputs inputs{annotations.get(), gen.get(), &oracles, &table, words, &prompts};
  const auto records = run_experiment(clues, config, inputs);
  const auto rows = tabulate(compare_all(records));
  std::ofstream(out_path(g, "table.txt"), std::ios::binary) << render_table(rows);
  std::ofstream(out_path(g, "table.json"), std::ios::binary) << table_json(rows) << "\n";
  emit_table(rows, g);
  return kOk;
}

// ------------------------------------------------------------ tabulate

int cmd_tabulate(const std::string& results, const Globals& g) {
  require_file(results, "results");
  const auto records = load_records(results);
  emit_table(tabulate(compare_all(records)), g);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cryptic crossword wordplay parser, proof verifier and provability experiment"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Data directory (lexicon/, prompts/, desk/, fixtures/)");
  app.add_option("--lexicon", g.lexicon_dir, "Lexicon directory");
  app.add_option("--embeddings", g.embeddings, "Embedding table in text vector format");
  app.add_option("--wordlist", g.wordlist, "Candidate wordlist");
  app.add_option("--prompts", g.prompts_dir, "Prompt section directory");
  app.add_option("--config", g.config_file, "JSON config file");
  app.add_option("--out", g.out_dir, "Output directory for written files")->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable output");

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "Parse a wordplay annotation");
  parse->add_option("annotation", parse_args.annotation, "Annotation text");
  parse->add_option("--file", parse_args.file, "One annotation per line");
  parse->add_option("--answer", parse_args.answer, "Resolve letters against this answer");

  std::string proof_file;
  auto* verify_cmd = app.add_subcommand("verify", "Verify a proof script");
  verify_cmd->add_option("proof", proof_file, "Proof file")->required();

  FormalizeArgs fa;
  auto* formalize = app.add_subcommand("formalize", "Compile wordplay into a proof script");
  formalize->add_option("--wordplay", fa.wordplay);
  formalize->add_option("--answer", fa.answer);
  formalize->add_option("--clue", fa.clue);
  formalize->add_option("--pattern", fa.pattern);
  formalize->add_option("--definition", fa.definition, "Clue with {} around the definition");
  formalize->add_option("--puzzles", fa.puzzles, "Formalise gold annotations from a puzzle file");
  formalize->add_option("--index", fa.index, "Only this clue of --puzzles");
  formalize->add_flag("--check", fa.check, "Verify the compiled proof");
  formalize->add_flag("--prompt", fa.prompt, "Also print the generator prompt");

  CandidateArgs ca;
  auto* candidates = app.add_subcommand("candidates", "Rank close decoy candidates");
  candidates->add_option("--span", ca.span)->required();
  candidates->add_option("--pattern", ca.pattern)->required();
  candidates->add_option("--exclude", ca.exclude);
  candidates->add_option("-k", ca.k)->capture_default_str();

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run the ground truth versus decoy experiment");
  experiment->add_option("--puzzles", ea.puzzles, "Puzzle YAML files");
  experiment->add_option("--generator", ea.generator, "mock, replay or live");
  experiment->add_option("--replay", ea.replay, "JSON-lines responses for the replay generator");
  experiment->add_option("--annotations", ea.annotations, "JSON-lines annotations instead of gold");
  experiment->add_option("--model", ea.model);
  experiment->add_option("--endpoint", ea.endpoint);
  experiment->add_option("--samples", ea.samples);
  experiment->add_option("--max-rewrites", ea.max_rewrites);
  experiment->add_option("--concurrency", ea.concurrency);
  experiment->add_option("--corrupt", ea.corrupt, "Mock corrupts its first N responses per request");
  experiment->add_flag("--resume", ea.resume, "Keep completed clues from an earlier run");

  std::string results_file;
  auto* tab = app.add_subcommand("tabulate", "Tabulate a results file");
  tab->add_option("results", results_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const Settings settings(app, g);
    const CLI::App& sub = *app.get_subcommands().front();
    const Resources r = resolve_paths(app, sub, g, settings);
    if (parse->parsed()) return cmd_parse(parse_args, g, r);
    if (verify_cmd->parsed()) return cmd_verify(proof_file, g, r);
    if (formalize->parsed()) return cmd_formalize(fa, g, r);
    if (candidates->parsed()) return cmd_candidates(ca, g, r);
    if (experiment->parsed()) return cmd_experiment(*experiment, ea, g, r, settings);
    if (tab->parsed()) return cmd_tabulate(results_file, g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
