// Shared fixtures and independent reference implementations for tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cryptic/dataset.hpp"
#include "cryptic/lexicon.hpp"
#include "cryptic/oracles.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return CRYPTIC_TEST_DATA; }
inline std::filesystem::path golden_dir() { return CRYPTIC_GOLDEN_DIR; }

inline std::shared_ptr<const cryptic::Lexicon> seed_lexicon() {
  static const auto lex =
      std::make_shared<const cryptic::Lexicon>(cryptic::Lexicon::load_directory(data_dir() / "lexicon"));
  return lex;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<cryptic::Clue> clues_from(const std::string& file) {
  std::vector<cryptic::Clue> out;
  for (auto& d : cryptic::load_puzzles(data_dir() / "fixtures" / file)) {
    for (auto& c : d.clues) out.push_back(c);
  }
  return out;
}

/// The eight wordplay-type clues followed by DELVE and CAMERA.
inline std::vector<cryptic::Clue> worked_clues() {
  auto out = clues_from("wordplay_types.yaml");
  for (auto& c : clues_from("worked_examples.yaml")) out.push_back(c);
  return out;
}

// Reference letters: ASCII letters only, uppercased.
inline std::string ref_letters(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (c >= 'a' && c <= 'z') out.push_back(static_cast<char>(c - 'a' + 'A'));
    if (c >= 'A' && c <= 'Z') out.push_back(static_cast<char>(c));
  }
  return out;
}

inline bool ref_anagram(const std::string& a, const std::string& b) {
  std::string x = ref_letters(a), y = ref_letters(b);
  if (x == y) return false;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

inline double ref_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) return 0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// Plain-text read of the embedding file, independent of the library parser.
struct RefTable {
  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;

  static RefTable load(const std::filesystem::path& p) {
    RefTable t;
    std::ifstream in(p);
    std::size_t count = 0, dim = 0;
    in >> count >> dim;
    for (std::size_t i = 0; i < count; ++i) {
      std::string w;
      in >> w;
      std::vector<double> v(dim);
      for (auto& x : v) in >> x;
      t.words.push_back(w);
      t.vectors.push_back(v);
    }
    return t;
  }

  // Mean of the vectors of known lowercase tokens, zero if none.
  std::vector<double> embed(const std::string& phrase) const {
    std::vector<double> sum(vectors.empty() ? 0 : vectors[0].size(), 0.0);
    std::istringstream in(phrase);
    std::string tok;
    int n = 0;
    while (in >> tok) {
      std::string low;
      for (unsigned char c : tok) low.push_back(static_cast<char>(std::tolower(c)));
      auto it = std::find(words.begin(), words.end(), low);
      if (it == words.end()) continue;
      const auto& v = vectors[static_cast<std::size_t>(it - words.begin())];
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
      ++n;
    }
    if (n > 0) {
      for (auto& x : sum) x /= n;
    }
    return sum;
  }
};

}  // namespace testing
