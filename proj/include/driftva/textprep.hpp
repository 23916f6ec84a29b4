// Copyright 2026 The driftva Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/porter.hpp"
#include "driftva/stopwords.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// stop words
// ---------------------------------------------------------------------------

class StopWordList {
 public:
  static StopWordList builtin() {
    StopWordList list;
    for (auto w : kBuiltinStopWords) list.insert(std::string(w));
    return list;
  }

  /// One word per line; blank lines and '#' comments ignored.
  static StopWordList load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stop-word list: " + path);
    StopWordList list;
    std::string line;
    while (std::getline(in, line)) {
      auto w = trim(line);
      if (w.empty() || w[0] == '#') continue;
      list.insert(to_lower(w));
    }
    if (list.empty()) throw DataError("stop-word list is empty: " + path);
    return list;
  }

  bool contains(std::string_view token) const {
    return set_.count(std::string(token)) > 0;
  }

  bool empty() const { return set_.empty(); }
  size_t size() const { return set_.size(); }

  /// Deterministic (sorted) view, for serialization and tests.
  std::vector<std::string> sorted_words() const {
    std::vector<std::string> out(set_.begin(), set_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void insert(std::string w) { set_.insert(std::move(w)); }
  std::unordered_set<std::string> set_;
};

// ---------------------------------------------------------------------------
// preprocessing stages
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Fold the common Unicode punctuation NVD text actually contains onto ASCII.
// Anything unmapped passes through untouched.
inline std::string normalize_unicode_punct(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size()) {
      unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
      unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
      if (b1 == 0x80) {
        switch (b2) {
          case 0x98: case 0x99: out += '\''; i += 3; continue;  // ' '
          case 0x9C: case 0x9D: out += '"'; i += 3; continue;   // " "
          case 0x93: case 0x94: out += '-'; i += 3; continue;   // en/em dash
          default: break;
        }
      }
    }
    if (c == 0xC2 && i + 1 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      out += ' ';  // no-break space
      i += 2;
      continue;
    }
    out += static_cast<char>(c);
    ++i;
  }
  return out;
}

}  // namespace detail

/// Drop a punctuation character only when its successor is whitespace or the
/// end of the text (single pass over the original). Interior punctuation
/// stays, so "input.c", "man-in-the-middle" and "cross-site" survive.
inline std::string strip_punctuation(std::string_view text) {
  std::string norm = detail::normalize_unicode_punct(text);
  std::string out;
  out.reserve(norm.size());
  for (size_t i = 0; i < norm.size(); ++i) {
    char c = norm[i];
    if (detail::is_ascii_punct(c)) {
      bool at_end = (i + 1 == norm.size());
      bool before_space =
          !at_end && std::isspace(static_cast<unsigned char>(norm[i + 1]));
      if (at_end || before_space) continue;
    }
    out += c;
  }
  return out;
}

/// Whitespace tokenization plus ASCII lowercasing; never yields empties.
inline std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> tokens = split_ws(text);
  for (auto& t : tokens) t = to_lower(t);
  return tokens;
}

inline std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                                 const StopWordList& list) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!list.contains(t)) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// composed document
// ---------------------------------------------------------------------------

struct PreprocessedDoc {
  std::vector<std::string> tokens;

  /// Tokens joined by single spaces; splitting it on spaces round-trips.
  std::string joined() const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i];
    }
    return out;
  }

  bool empty() const { return tokens.empty(); }
};

/// Full pipeline: strip punctuation, tokenize+lowercase, drop stop words
/// (surface forms), then Porter-stem what remains. Pure and deterministic.
inline PreprocessedDoc preprocess(std::string_view text, const StopWordList& list) {
  PreprocessedDoc doc;
  auto tokens = tokenize_lower(strip_punctuation(text));
  tokens = remove_stopwords(tokens, list);
  doc.tokens.reserve(tokens.size());
  for (auto& t : tokens) doc.tokens.push_back(porter_stem(t));
  return doc;
}

}  // namespace driftva
