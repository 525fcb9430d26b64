#include "cryptic/phonetic.hpp"

#include "cryptic/core.hpp"

namespace cryptic {

namespace {

bool plain_vowel(char c) { return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U'; }

bool front_vowel(char c) { return c == 'E' || c == 'I' || c == 'Y'; }

}  // namespace

std::string phonetic_key(std::string_view text) {
  std::string s = normalize_letters(text);
  if (s.size() >= 2) {
    const std::string head = s.substr(0, 2);
    if (head == "KN" || head == "GN" || head == "PN" || head == "WR" || head == "PS") {
      s.erase(0, 1);
    } else if (head == "WH") {
      s.erase(1, 1);
    }
  }
  if (!s.empty() && s[0] == 'X') s[0] = 'S';

  const std::size_t n = s.size();
  auto at = [&](std::size_t i) -> char { return i < n ? s[i] : '\0'; };
  // Y is a consonant only when a vowel follows it.
  auto is_vowel = [&](std::size_t i) {
    if (i >= n) return false;
    if (s[i] == 'Y') return !plain_vowel(at(i + 1));
    return plain_vowel(s[i]);
  };

  std::string key;
  std::size_t i = 0;
  while (i < n) {
    const char c = s[i];
    if (is_vowel(i)) {
      std::size_t j = i;
      while (j < n && is_vowel(j)) ++j;
      const bool silent_e = c == 'E' && j == i + 1 && j == n && i > 0 && n > 2;
      if (!silent_e) key.push_back(c == 'Y' ? 'I' : c);
      i = j;
      continue;
    }
    const char next = at(i + 1);
    switch (c) {
      case 'B':
        if (!(i + 1 == n && i > 0 && s[i - 1] == 'M')) key.push_back('B');
        break;
      case 'C':
        if (next == 'H') {
          key.push_back('X');
          ++i;
        } else if (front_vowel(next)) {
          key.push_back('S');
        } else {
          key.push_back('K');
          if (next == 'K') ++i;
        }
        break;
      case 'D':
        if (next == 'G' && front_vowel(at(i + 2))) {
          key.push_back('J');
          ++i;
        } else {
          key.push_back('D');
        }
        break;
      case 'G':
        if (next == 'H') {
          if (i == 0) key.push_back('G');
          ++i;
        } else if (front_vowel(next)) {
          key.push_back('J');
        } else if (next == 'N' && i + 2 == n) {
          // silent, as in "sign"
        } else {
          key.push_back('G');
        }
        break;
      case 'H':
        if (!(i > 0 && is_vowel(i - 1) && !is_vowel(i + 1))) key.push_back('H');
        break;
      case 'P':
        if (next == 'H') {
          key.push_back('F');
          ++i;
        } else {
          key.push_back('P');
        }
        break;
      case 'Q':
        key.push_back('K');
        break;
      case 'S':
        if (next == 'H') {
          key.push_back('X');
          ++i;
        } else {
          key.push_back('S');
        }
        break;
      case 'T':
        if (next == 'H') {
          key.push_back('0');
          ++i;
        } else if (!(next == 'C' && at(i + 2) == 'H')) {
          key.push_back('T');
        }
        break;
      case 'V':
        key.push_back('F');
        break;
      case 'W':
        if (next == 'H') {
          key.push_back('W');
          ++i;
        } else if (!(i > 0 && is_vowel(i - 1) && !is_vowel(i + 1))) {
          key.push_back('W');
        }
        break;
      case 'X':
        key += "KS";
        break;
      case 'Z':
        key.push_back('S');
        break;
      default:
        key.push_back(c);  // F J K L M N R and consonantal Y
        break;
    }
    ++i;
  }
  return key;
}

}  // namespace cryptic
