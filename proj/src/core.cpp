#include "cryptic/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <array>
#include <cctype>

namespace cryptic {

namespace {

// Base letters for U+00C0..U+00FF; 0 means "no letter".
constexpr std::array<char, 64> kLatin1Fold = {
    'A', 'A', 'A', 'A', 'A', 'A', 'A', 'C', 'E', 'E', 'E', 'E', 'I', 'I', 'I', 'I',
    'D', 'N', 'O', 'O', 'O', 'O', 'O', 0,   'O', 'U', 'U', 'U', 'U', 'Y', 0,   'S',
    'A', 'A', 'A', 'A', 'A', 'A', 'A', 'C', 'E', 'E', 'E', 'E', 'I', 'I', 'I', 'I',
    'D', 'N', 'O', 'O', 'O', 'O', 'O', 0,   'O', 'U', 'U', 'U', 'U', 'Y', 0,   'Y',
};

// Calls emit(ch) for every letter of text, already uppercased, and
// emit(' ') at every non-letter boundary.
template <typename Emit>
void scan_letters(std::string_view text, Emit&& emit) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (std::isalpha(c)) {
        emit(static_cast<char>(std::toupper(c)));
      } else if (c != '\'') {
        emit(' ');
      }
      continue;
    }
    // Multi-byte UTF-8 sequence.
    std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
    if (len == 2 && i + 1 < text.size()) {
      const unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(text[i + 1]) & 0x3Fu);
      if (cp >= 0xC0 && cp <= 0xFF && kLatin1Fold[cp - 0xC0] != 0) {
        emit(kLatin1Fold[cp - 0xC0]);
        if (cp == 0xDF) emit('S');  // sharp s
      } else if (cp == 0xC6 || cp == 0xE6) {
        emit('A');
        emit('E');
      }
    } else if (len == 3 && i + 2 < text.size()) {
      // Right single quote and other typographic apostrophes join words.
      const bool apostrophe = c == 0xE2 && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
                              (static_cast<unsigned char>(text[i + 2]) == 0x99 ||
                               static_cast<unsigned char>(text[i + 2]) == 0x98);
      if (!apostrophe) emit(' ');
    } else {
      emit(' ');
    }
    i += len - 1;
  }
}

}  // namespace

Pattern::Pattern(std::vector<int> groups, std::vector<Separator> separators)
    : groups_(std::move(groups)), separators_(std::move(separators)) {
  if (groups_.empty()) throw PatternError("pattern needs at least one group");
  if (separators_.size() + 1 != groups_.size()) {
    throw PatternError("pattern separators must number groups - 1");
  }
  for (int g : groups_) {
    if (g <= 0) throw PatternError("pattern groups must be positive");
    total_ += g;
  }
}

Pattern Pattern::parse(std::string_view text) {
  std::vector<int> groups;
  std::vector<Separator> seps;
  std::string digits;
  bool expect_digit = true;
  auto flush = [&] {
    if (digits.empty()) {
      throw PatternError("malformed pattern '" + std::string(text) + "'");
    }
    if (digits.size() > 6) throw PatternError("pattern group too large");
    groups.push_back(std::stoi(digits));
    digits.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      expect_digit = false;
    } else if (c == ',' || c == '-') {
      if (expect_digit) throw PatternError("malformed pattern '" + std::string(text) + "'");
      flush();
      seps.push_back(c == ',' ? Separator::Comma : Separator::Hyphen);
      expect_digit = true;
    } else {
      throw PatternError("unexpected character in pattern '" + std::string(text) + "'");
    }
  }
  flush();
  return Pattern(std::move(groups), std::move(seps));
}

std::string Pattern::render() const {
  std::string out;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (i > 0) out.push_back(separators_[i - 1] == Separator::Comma ? ',' : '-');
    out += std::to_string(groups_[i]);
  }
  return out;
}

void validate(const Clue& clue) {
  if (clue.gold_answer && !pattern_matches(*clue.gold_answer, clue.pattern)) {
    throw Error("clue " + clue.id + ": answer '" + *clue.gold_answer +
                "' does not match pattern " + clue.pattern.render());
  }
  if (clue.gold_definition) {
    std::string stripped;
    for (char c : *clue.gold_definition) {
      if (c != '{' && c != '}') stripped.push_back(c);
    }
    if (stripped != clue.surface) {
      throw Error("clue " + clue.id + ": definition differs from clue text");
    }
  }
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Anagram: return "ANAGRAM";
    case ActionKind::RemoveFirst: return "REMOVE_FIRST";
    case ActionKind::Initials: return "INITIALS";
    case ActionKind::RemoveLast: return "REMOVE_LAST";
    case ActionKind::GoesInside: return "GOES_INSIDE";
    case ActionKind::GoesOutside: return "GOES_OUTSIDE";
    case ActionKind::Reverse: return "REVERSE";
    case ActionKind::Substring: return "SUBSTRING";
    case ActionKind::Homophone: return "HOMOPHONE";
  }
  return "?";
}

std::optional<ActionKind> parse_action(std::string_view name) {
  std::string n = trim(name);
  if (n.rfind("Action.", 0) == 0) n = n.substr(7);
  for (ActionKind k : kAllActions) {
    if (n == to_string(k)) return k;
  }
  if (n == "IS_OUTSIDE") return ActionKind::GoesOutside;
  return std::nullopt;
}

std::string normalize_letters(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  scan_letters(text, [&](char c) {
    if (c != ' ') out.push_back(c);
  });
  return out;
}

bool pattern_matches(std::string_view answer, const Pattern& pattern) {
  return static_cast<int>(normalize_letters(answer).size()) == pattern.total();
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  scan_letters(text, [&](char c) {
    if (c == ' ') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  });
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("CRYPTIC_DATA_DIR"); env && *env) return env;
  return CRYPTIC_DATA_DIR;
}

}  // namespace cryptic
