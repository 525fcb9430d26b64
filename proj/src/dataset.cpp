#include "cryptic/dataset.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace cryptic {

namespace {

const std::set<std::string> kClueKeys = {"clue", "pattern", "ad", "answer", "wordplay"};

std::string slug_of(const std::string& url, const std::string& title) {
  std::string base = url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (auto pos = base.find_last_of('/'); pos != std::string::npos) base = base.substr(pos + 1);
  if (auto pos = base.find('#'); pos != std::string::npos) base = base.substr(pos + 1);
  if (base.empty()) base = title;
  std::string slug;
  for (char c : base) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!slug.empty() && slug.back() != '-') {
      slug.push_back('-');
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  return slug.empty() ? "doc" : slug;
}

std::string scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) throw SchemaError(where + " must be a scalar");
  return node.as<std::string>();
}

Clue parse_clue(const YAML::Node& node, std::size_t index, const std::string& slug) {
  const std::string where = "clue " + std::to_string(index);
  if (!node.IsMap()) throw SchemaError(where + ": entry is not a mapping");
  for (const char* key : {"clue", "pattern"}) {
    if (!node[key]) throw SchemaError(where + ": missing required key '" + key + "'");
  }
  Clue clue;
  clue.id = slug + "#" + std::to_string(index);

  const std::string annotated = scalar(node["clue"], where + " 'clue'");
  ExtractedDefinition def;
  try {
    def = extract_definition(annotated);
  } catch (const UnbalancedBraces& e) {
    throw SchemaError(where + ": " + e.what());
  }
  clue.surface = def.plain;
  if (!def.spans.empty()) clue.gold_definition = annotated;

  try {
    clue.pattern = Pattern::parse(scalar(node["pattern"], where + " 'pattern'"));
  } catch (const PatternError& e) {
    throw SchemaError(where + ": key 'pattern': " + e.what());
  }

  if (node["ad"]) {
    const std::string ad = scalar(node["ad"], where + " 'ad'");
    if (ad == "A") {
      clue.direction = Direction::Across;
    } else if (ad == "D") {
      clue.direction = Direction::Down;
    } else {
      throw SchemaError(where + ": key 'ad' must be A or D, got '" + ad + "'");
    }
  }
  if (node["answer"]) {
    clue.gold_answer = normalize_letters(scalar(node["answer"], where + " 'answer'"));
    if (!pattern_matches(*clue.gold_answer, clue.pattern)) {
      throw SchemaError(where + ": key 'answer' does not match pattern " + clue.pattern.render());
    }
  }
  if (node["wordplay"]) clue.gold_wordplay = scalar(node["wordplay"], where + " 'wordplay'");

  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (kClueKeys.count(key)) continue;
    YAML::Emitter out;
    out << kv.second;
    clue.extras.emplace_back(key, out.c_str());
  }
  return clue;
}

PuzzleDocument parse_document(const YAML::Node& node) {
  if (!node.IsMap()) throw SchemaError("document is not a mapping");
  PuzzleDocument doc;
  if (node["title"]) doc.title = scalar(node["title"], "document 'title'");
  if (node["url"]) doc.url = scalar(node["url"], "document 'url'");
  if (node["author"]) doc.author = scalar(node["author"], "document 'author'");
  const std::string slug = slug_of(doc.url, doc.title);
  const YAML::Node clues = node["clues"];
  if (!clues) throw SchemaError("document is missing key 'clues'");
  if (clues.IsNull()) return doc;
  if (!clues.IsSequence()) throw SchemaError("document key 'clues' must be a list");
  for (std::size_t i = 0; i < clues.size(); ++i) doc.clues.push_back(parse_clue(clues[i], i, slug));
  return doc;
}

}  // namespace

std::vector<PuzzleDocument> parse_puzzles(std::string_view yaml_text) {
  std::vector<YAML::Node> nodes;
  try {
    nodes = YAML::LoadAll(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw SchemaError(std::string("invalid YAML: ") + e.what());
  }
  std::vector<PuzzleDocument> docs;
  for (const auto& node : nodes) {
    if (node.IsNull()) continue;
    if (node.IsSequence()) {
      for (const auto& sub : node) docs.push_back(parse_document(sub));
    } else {
      docs.push_back(parse_document(node));
    }
  }
  return docs;
}

std::vector<PuzzleDocument> load_puzzles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_puzzles(buf.str());
}

std::string dump_puzzles(const std::vector<PuzzleDocument>& docs) {
  std::string text;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "title" << YAML::Value << doc.title;
    out << YAML::Key << "url" << YAML::Value << doc.url;
    out << YAML::Key << "author" << YAML::Value << doc.author;
    out << YAML::Key << "clues" << YAML::Value;
    if (doc.clues.empty()) {
      out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
    } else {
      out << YAML::BeginSeq;
      for (const auto& clue : doc.clues) {
        out << YAML::BeginMap;
        out << YAML::Key << "clue" << YAML::Value << YAML::SingleQuoted
            << clue.gold_definition.value_or(clue.surface);
        out << YAML::Key << "pattern" << YAML::Value << YAML::SingleQuoted << clue.pattern.render();
        out << YAML::Key << "ad" << YAML::Value << (clue.direction == Direction::Down ? "D" : "A");
        if (clue.gold_answer) out << YAML::Key << "answer" << YAML::Value << *clue.gold_answer;
        if (clue.gold_wordplay) out << YAML::Key << "wordplay" << YAML::Value << *clue.gold_wordplay;
        for (const auto& [key, value] : clue.extras) {
          out << YAML::Key << key << YAML::Value << YAML::Load(value);
        }
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    if (d > 0) text += "---\n";
    text += out.c_str();
    text += "\n";
  }
  return text;
}

void save_puzzles(const std::filesystem::path& path, const std::vector<PuzzleDocument>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file " + path.string());
  out << dump_puzzles(docs);
}

ExtractedDefinition extract_definition(std::string_view annotated_clue) {
  ExtractedDefinition result;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < annotated_clue.size(); ++i) {
    const char c = annotated_clue[i];
    if (c == '{') {
      if (open) throw UnbalancedBraces("nested '{' at offset " + std::to_string(i));
      open = result.plain.size();
    } else if (c == '}') {
      if (!open) throw UnbalancedBraces("unmatched '}' at offset " + std::to_string(i));
      if (*open == result.plain.size()) {
        throw UnbalancedBraces("empty definition span at offset " + std::to_string(i));
      }
      result.spans.push_back({result.plain.substr(*open), *open, result.plain.size()});
      open.reset();
    } else {
      result.plain.push_back(c);
    }
  }
  if (open) throw UnbalancedBraces("unclosed '{'");
  return result;
}

std::string annotate_definition(std::string_view plain, const std::vector<DefinitionSpan>& spans) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& span : spans) {
    out.append(plain.substr(pos, span.start - pos));
    out.push_back('{');
    out.append(plain.substr(span.start, span.end - span.start));
    out.push_back('}');
    pos = span.end;
  }
  out.append(plain.substr(pos));
  return out;
}

}  // namespace cryptic
