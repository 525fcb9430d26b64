#include <doctest.h>

#include <set>

#include "cryptic/dataset.hpp"
#include "support.hpp"

using namespace cryptic;

TEST_CASE("sample puzzle file loads") {
  const auto docs = load_puzzles(testing::data_dir() / "fixtures" / "sample_puzzle.yaml");
  REQUIRE(docs.size() == 1);
  REQUIRE(docs[0].clues.size() == 1);
  const Clue& c = docs[0].clues[0];
  CHECK(docs[0].title == "Financial Times 16,479 by FALCON");
  CHECK(docs[0].author == "teacow");
  CHECK(c.gold_answer == "PROPOSAL");
  CHECK(c.gold_wordplay == "PROP (support) + (ALSO)* (*broadcast)");
  CHECK(c.gold_definition == "{Offer} of support also broadcast");
  CHECK(c.surface == "Offer of support also broadcast");
  CHECK(c.direction == Direction::Down);
  CHECK(c.pattern.total() == 8);
}

TEST_CASE("schema errors name the clue and key") {
  const char* missing = "title: t\nurl: u\nclues:\n- clue: 'x'\n  answer: X\n";
  try {
    parse_puzzles(missing);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("clue 0") != std::string::npos);
    CHECK(std::string(e.what()).find("pattern") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_puzzles("title: t\nclues:\n- clue: x\n  pattern: '1'\n  ad: 12A\n"), SchemaError);
  CHECK_THROWS_AS(parse_puzzles("title: t\nclues:\n- clue: '{x'\n  pattern: '1'\n"), SchemaError);
  CHECK_THROWS_AS(parse_puzzles("title: t\nclues:\n- clue: x\n  pattern: '2'\n  answer: ABC\n"), SchemaError);
}

TEST_CASE("empty clue list is not an error") {
  const auto docs = parse_puzzles("title: t\nurl: u\nauthor: a\nclues: []\n");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].clues.empty());
}

TEST_CASE("ad absent defaults to across") {
  const auto docs = parse_puzzles("title: t\nclues:\n- clue: x\n  pattern: '1'\n");
  CHECK(docs[0].clues[0].direction == Direction::Across);
}

TEST_CASE("extract_definition finds spans") {
  auto one = extract_definition("{Offer} of support also broadcast");
  REQUIRE(one.spans.size() == 1);
  CHECK(one.spans[0].text == "Offer");
  CHECK(one.plain == "Offer of support also broadcast");

  auto two = extract_definition("{Not seeing} {window covering}");
  REQUIRE(two.spans.size() == 2);
  CHECK(two.spans[0].text == "Not seeing");
  CHECK(two.spans[1].text == "window covering");
  CHECK(two.plain.substr(two.spans[1].start, two.spans[1].end - two.spans[1].start) == "window covering");

  auto none = extract_definition("no braces here");
  CHECK(none.spans.empty());
  CHECK(none.plain == "no braces here");

  CHECK_THROWS_AS(extract_definition("{open"), UnbalancedBraces);
  CHECK_THROWS_AS(extract_definition("close}"), UnbalancedBraces);
  CHECK_THROWS_AS(extract_definition("{a {b}}"), UnbalancedBraces);
}

TEST_CASE("annotate_definition reinserts spans exactly") {
  for (const char* s : {"{Offer} of support also broadcast", "{Not seeing} {window covering}",
                        "rudeness about son\xE2\x80\x99s {computer language}", "plain"}) {
    const auto d = extract_definition(s);
    CHECK(annotate_definition(d.plain, d.spans) == s);
  }
}

TEST_CASE("load, save, load is a fixed point") {
  const auto dir = std::filesystem::temp_directory_path() / "cryptic_dataset_test";
  std::filesystem::create_directories(dir);
  for (const char* f : {"wordplay_types.yaml", "worked_examples.yaml", "sample_puzzle.yaml"}) {
    const auto first = load_puzzles(testing::data_dir() / "fixtures" / f);
    save_puzzles(dir / f, first);
    const auto second = load_puzzles(dir / f);
    CHECK(second.size() == first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(second[i].title == first[i].title);
      CHECK(second[i].url == first[i].url);
      CHECK(second[i].clues == first[i].clues);
    }
    CHECK(dump_puzzles(second) == dump_puzzles(first));
  }
}

TEST_CASE("extra keys and curly quotes survive a round trip") {
  const std::string yaml =
      "title: t\nurl: https://x.org/a\nclues:\n- clue: 'rudeness about son\xE2\x80\x99s {computer language}'\n"
      "  pattern: '4'\n  ad: A\n  answer: LISP\n  wordplay: x\n  setter_note: keep me\n";
  const auto docs = parse_puzzles(yaml);
  const Clue& c = docs[0].clues[0];
  REQUIRE(c.extras.size() == 1);
  CHECK(c.extras[0].first == "setter_note");
  const auto again = parse_puzzles(dump_puzzles(docs));
  CHECK(again[0].clues[0] == c);
  CHECK(again[0].clues[0].surface.find("\xE2\x80\x99") != std::string::npos);
  const std::string dumped = dump_puzzles(docs);
  CHECK(dumped.find("clue:") < dumped.find("pattern:"));
  CHECK(dumped.find("pattern:") < dumped.find("ad:"));
  CHECK(dumped.find("answer:") < dumped.find("wordplay:"));
}

TEST_CASE("clue ids are unique and stable") {
  const auto clues = testing::clues_from("wordplay_types.yaml");
  REQUIRE(clues.size() == 8);
  std::set<std::string> ids;
  for (const auto& c : clues) ids.insert(c.id);
  CHECK(ids.size() == 8);
  CHECK(clues[0].id == testing::clues_from("wordplay_types.yaml")[0].id);
}
