#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

const std::filesystem::path& scratch() {
  static const auto p = [] {
    auto d = std::filesystem::temp_directory_path() / "cryptic_cli_test";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return p;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Run cli(const std::string& args, const std::string& env = "") {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + quote(CRYPTIC_CLI) + " " + args + " >" + quote(out.string()) + " 2>" +
                          quote(err.string());
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::read_file(out), testing::read_file(err)};
}

std::string proof(const char* name) { return quote((testing::data_dir() / "proofs" / name).string()); }

}  // namespace

TEST_CASE("parse prints the tree and letters") {
  const auto r = cli("parse 'BAN (outlaw) + KING (leader)'");
  CHECK(r.code == 0);
  CHECK(r.out.find("BANKING") != std::string::npos);
  CHECK(r.out.find("SynonymOf") != std::string::npos);
}

TEST_CASE("parse failure exits 2 with a diagnostic") {
  const auto r = cli("parse '((('");
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("parse a file of annotations") {
  const auto f = scratch() / "wordplays.txt";
  std::ofstream(f) << "BAN (outlaw) + KING (leader)\n(LAGER)< (beer, <returned)\n";
  const auto r = cli("--json parse --file " + quote(f.string()));
  CHECK(r.code == 0);
  std::vector<std::string> letters;
  for (const auto& row : nlohmann::json::parse(r.out)) letters.push_back(row["letters"].get<std::string>());
  CHECK(letters == std::vector<std::string>{"BANKING", "REGAL"});
}

TEST_CASE("verify exit codes") {
  CHECK(cli("verify " + proof("camera.proof")).code == 0);
  const auto rude = cli("verify " + proof("rude.proof"));
  CHECK(rude.code == 1);
  CHECK(rude.out.find("AssertionError: assert: is_synonym('assistant', 'ASS')") != std::string::npos);
  CHECK(cli("verify " + proof("malformed.proof")).code == 2);
  CHECK(cli("verify " + proof("negated.proof")).code == 1);
  CHECK(cli("verify /nonexistent.proof").code == 2);
}

TEST_CASE("verify json output") {
  const auto r = cli("verify " + proof("rude.proof") + " --json");
  CHECK(r.code == 1);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "FAILED");
  CHECK(j["failures"].size() == 2);
}

TEST_CASE("formalize gold annotations") {
  const auto fixtures = quote((testing::data_dir() / "fixtures" / "wordplay_types.yaml").string());
  const auto r = cli("formalize --puzzles " + fixtures + " --index 0 --check");
  CHECK(r.code == 0);
  CHECK(r.out.find("assert is_anagram(\"CORSET\", \"ESCORT\")") != std::string::npos);
  const auto inline_args = cli(
      "formalize --wordplay 'CAME (arrived) + RA (artist, short form)' --answer CAMERA "
      "--clue 'arrived with an artist, to get optical device' --pattern 6 "
      "--definition 'arrived with an artist, to get {optical device}' --check");
  CHECK(inline_args.code == 0);
  CHECK(inline_args.out.find("assert \"CAME\" + \"RA\" == \"CAMERA\"") != std::string::npos);
}

TEST_CASE("candidates ranks decoys") {
  const auto r = cli("candidates --span 'optical device' --pattern 6 --exclude CAMERA -k 2 --json");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["word"] != "CAMERA");
  CHECK(cli("candidates --span x --pattern 99").code == 2);
}

TEST_CASE("missing embeddings file exits 2") {
  const auto r = cli("candidates --span x --pattern 6 --embeddings /nonexistent/vectors.txt");
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/vectors.txt") != std::string::npos);
  CHECK(cli("candidates --span x --pattern 6", "CRYPTIC_EMBEDDINGS=/nonexistent/env.txt").code == 2);
}

TEST_CASE("flags beat environment beat config") {
  const auto cfg = scratch() / "config.json";
  std::ofstream(cfg) << "{\"embeddings\": \"/nonexistent/config.txt\"}";
  const std::string good = quote((testing::data_dir() / "desk" / "embeddings.txt").string());
  const auto from_config = cli("candidates --span x --pattern 6 --config " + quote(cfg.string()));
  CHECK(from_config.code == 2);
  CHECK(from_config.err.find("config.txt") != std::string::npos);
  const auto from_env = cli("candidates --span x --pattern 6 --config " + quote(cfg.string()),
                            "CRYPTIC_EMBEDDINGS=/nonexistent/env.txt");
  CHECK(from_env.err.find("env.txt") != std::string::npos);
  CHECK(cli("candidates --span x --pattern 6 --embeddings " + good + " --config " + quote(cfg.string()),
            "CRYPTIC_EMBEDDINGS=/nonexistent/env.txt")
            .code == 0);
}

TEST_CASE("experiment writes results and resumes") {
  const auto out = scratch() / "exp";
  std::filesystem::create_directories(out);
  const auto r = cli("experiment --samples 2 --out " + quote(out.string()));
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(out / "results.jsonl"));
  CHECK(std::filesystem::exists(out / "transcripts.jsonl"));
  const std::string table = testing::read_file(out / "table.txt");
  CHECK(table.find("Completed proofs") != std::string::npos);
  const std::string results = testing::read_file(out / "results.jsonl");
  CHECK(std::count(results.begin(), results.end(), '\n') == 8 * 2 * 2);

  // Replay with no responses fails every call, so resume must not call it.
  const auto empty = scratch() / "empty.jsonl";
  std::ofstream(empty) << "";
  const auto again = cli("experiment --samples 2 --resume --generator replay --replay " + quote(empty.string()) +
                         " --out " + quote(out.string()));
  CHECK(again.code == 0);
  CHECK(testing::read_file(out / "results.jsonl") == results);

  const auto tab = cli("tabulate " + quote((out / "results.jsonl").string()) + " --json");
  CHECK(tab.code == 0);
  CHECK(nlohmann::json::parse(tab.out).size() == 3);
}

TEST_CASE("experiment argument errors") {
  CHECK(cli("experiment --max-rewrites -1 --out " + quote(scratch().string())).code == 2);
  CHECK(cli("experiment --generator bogus --out " + quote(scratch().string())).code == 2);
  CHECK(cli("experiment --generator replay --out " + quote(scratch().string())).code == 2);
  CHECK(cli("experiment --generator live --model m --out " + quote(scratch().string()), "CRYPTIC_API_KEY=").code == 2);
}

TEST_CASE("unknown subcommand is a usage error") {
  CHECK(cli("frobnicate").code != 0);
  CHECK(cli("--help").code == 0);
}
