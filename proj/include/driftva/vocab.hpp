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

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/textprep.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// the eight NLP representations
// ---------------------------------------------------------------------------

/// One row of the representation grid: word n-gram range 1..word_ngram_max
/// crossed with term-frequency or tf-idf weighting.
struct NlpConfig {
  int config_id = 1;       // 1..8
  int word_ngram_max = 1;  // 1..4
  bool use_tfidf = false;

  bool operator==(const NlpConfig&) const = default;
};

inline NlpConfig nlp_config(int config_id) {
  switch (config_id) {
    case 1: return {1, 1, false};
    case 2: return {2, 1, true};
    case 3: return {3, 2, false};
    case 4: return {4, 3, false};
    case 5: return {5, 4, false};
    case 6: return {6, 2, true};
    case 7: return {7, 3, true};
    case 8: return {8, 4, true};
    default:
      throw UsageError("NLP configuration id must be 1..8, got " + std::to_string(config_id));
  }
}

inline std::vector<NlpConfig> all_nlp_configs() {
  std::vector<NlpConfig> out;
  for (int i = 1; i <= 8; ++i) out.push_back(nlp_config(i));
  return out;
}

// ---------------------------------------------------------------------------
// n-gram primitives
// ---------------------------------------------------------------------------

/// All contiguous token n-grams for n = 1..n_max, joined by single spaces.
/// Returned as a multiset (duplicates preserved).
inline std::vector<std::string> word_ngrams(const std::vector<std::string>& tokens, int n_max) {
  std::vector<std::string> out;
  const int len = static_cast<int>(tokens.size());
  for (int n = 1; n <= n_max; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      std::string gram = tokens[static_cast<size_t>(i)];
      for (int k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[static_cast<size_t>(i + k)];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

/// All contiguous character n-grams of the raw string (spaces included as
/// characters) for n = n_min..n_max, as a multiset.
inline std::vector<std::string> char_ngrams(std::string_view text, int n_min, int n_max) {
  std::vector<std::string> out;
  const int len = static_cast<int>(text.size());
  for (int n = n_min; n <= n_max; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      out.emplace_back(text.substr(static_cast<size_t>(i), static_cast<size_t>(n)));
    }
  }
  return out;
}

/// Character grams of one word with a leading and trailing space added, so
/// word-boundary grams are represented the way the raw sentence grams are.
inline std::vector<std::string> padded_word_char_grams(std::string_view word, int n_min,
                                                       int n_max) {
  std::string padded;
  padded.reserve(word.size() + 2);
  padded += ' ';
  padded += word;
  padded += ' ';
  return char_ngrams(padded, n_min, n_max);
}

// ---------------------------------------------------------------------------
// vocabularies
// ---------------------------------------------------------------------------

/// Frozen term list with per-term document frequency. Terms are unique and
/// lexicographically sorted; the sort order defines column indices, which
/// keeps sparse matrices reproducible across runs and platforms.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// terms need not be sorted or deduplicated on input.
  static Vocabulary from_term_dfs(std::vector<std::pair<std::string, size_t>> term_dfs,
                                  double min_df_ratio, size_t n_docs) {
    std::sort(term_dfs.begin(), term_dfs.end());
    term_dfs.erase(std::unique(term_dfs.begin(), term_dfs.end()), term_dfs.end());
    Vocabulary v;
    v.min_df_ratio_ = min_df_ratio;
    v.n_docs_ = n_docs;
    v.terms_.reserve(term_dfs.size());
    v.df_.reserve(term_dfs.size());
    for (auto& [term, df] : term_dfs) {
      v.terms_.push_back(std::move(term));
      v.df_.push_back(df);
    }
    v.rebuild_index();
    return v;
  }

  static Vocabulary from_terms(const std::set<std::string>& terms) {
    std::vector<std::pair<std::string, size_t>> td;
    td.reserve(terms.size());
    for (const auto& t : terms) td.emplace_back(t, 0);
    return from_term_dfs(std::move(td), 0.0, 0);
  }

  size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(size_t i) const { return terms_[i]; }
  size_t df(size_t i) const { return df_[i]; }
  const std::vector<std::string>& terms() const { return terms_; }
  double min_df_ratio() const { return min_df_ratio_; }
  size_t n_docs() const { return n_docs_; }

  std::optional<size_t> find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view term) const { return find(term).has_value(); }

  std::string to_string() const {
    std::ostringstream out;
    out << "# driftva vocabulary v1\n";
    out << "# n_docs " << n_docs_ << " min_df_ratio " << fmt_double(min_df_ratio_) << "\n";
    for (size_t i = 0; i < terms_.size(); ++i) {
      out << terms_[i] << '\t' << df_[i] << '\n';
    }
    return out.str();
  }

  static Vocabulary parse(std::string_view content, std::string_view origin = "<memory>") {
    Vocabulary v;
    for (const auto& line : split(content, '\n')) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        auto f = split_ws(line);
        for (size_t i = 0; i + 1 < f.size(); ++i) {
          if (f[i] == "n_docs") v.n_docs_ = std::stoull(f[i + 1]);
          if (f[i] == "min_df_ratio") v.min_df_ratio_ = std::stod(f[i + 1]);
        }
        continue;
      }
      auto f = split(line, '\t');
      if (f.size() != 2) {
        throw DataError(std::string(origin) + ": bad vocabulary line: " + line);
      }
      v.terms_.push_back(f[0]);
      v.df_.push_back(std::stoull(f[1]));
    }
    if (!std::is_sorted(v.terms_.begin(), v.terms_.end())) {
      throw DataError(std::string(origin) + ": vocabulary terms not sorted");
    }
    v.rebuild_index();
    return v;
  }

 private:
  void rebuild_index() {
    index_.clear();
    index_.reserve(terms_.size());
    for (size_t i = 0; i < terms_.size(); ++i) index_[terms_[i]] = i;
  }

  std::vector<std::string> terms_;
  std::vector<size_t> df_;
  double min_df_ratio_ = 0.0;
  size_t n_docs_ = 0;
  std::unordered_map<std::string, size_t> index_;
};

/// Document frequency of every distinct word n-gram over the supplied docs.
inline std::unordered_map<std::string, size_t> word_ngram_dfs(
    const std::vector<PreprocessedDoc>& docs, int n_max) {
  std::unordered_map<std::string, size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> seen;
    for (auto& g : word_ngrams(doc.tokens, n_max)) seen.insert(std::move(g));
    for (const auto& g : seen) ++df[g];
  }
  return df;
}

/// Word n-gram vocabulary from training-side docs only: keeps terms whose
/// document frequency strictly exceeds min_df_ratio * |docs|.
inline Vocabulary build_word_vocab(const std::vector<PreprocessedDoc>& docs, int n_max,
                                   double min_df_ratio) {
  if (docs.empty()) throw DataError("build_word_vocab: no documents supplied");
  auto df = word_ngram_dfs(docs, n_max);
  const double threshold = min_df_ratio * static_cast<double>(docs.size());
  std::vector<std::pair<std::string, size_t>> kept;
  size_t max_df = 0;
  for (auto& [term, count] : df) {
    max_df = std::max(max_df, count);
    if (static_cast<double>(count) > threshold) kept.emplace_back(term, count);
  }
  if (kept.empty()) {
    throw DataError("build_word_vocab: empty vocabulary (docs=" + std::to_string(docs.size()) +
                    ", min_df_ratio=" + fmt_double(min_df_ratio) + ", df threshold > " +
                    fmt_double(threshold) + ", max df observed=" + std::to_string(max_df) + ")");
  }
  return Vocabulary::from_term_dfs(std::move(kept), min_df_ratio, docs.size());
}

/// High-frequency tokens (document frequency strictly above hf_ratio * |docs|)
/// from which character n-grams are generated. Tokens are post-preprocessing,
/// so stop words are already gone and stems are the unit of counting.
inline std::set<std::string> build_char_source_words(const std::vector<PreprocessedDoc>& docs,
                                                     double hf_ratio = 0.10) {
  if (docs.empty()) throw DataError("build_char_source_words: no documents supplied");
  std::unordered_map<std::string, size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> seen(doc.tokens.begin(), doc.tokens.end());
    for (const auto& t : seen) ++df[t];
  }
  const double threshold = hf_ratio * static_cast<double>(docs.size());
  std::set<std::string> out;
  for (const auto& [token, count] : df) {
    if (static_cast<double>(count) > threshold) out.insert(token);
  }
  return out;
}

/// Raw character-gram pool from a set of source words (each padded with one
/// leading and one trailing space). This is the unfiltered input the feature
/// aggregation stage prunes down to within-word grams.
inline std::set<std::string> build_char_gram_pool(const std::set<std::string>& source_words,
                                                  int n_min, int n_max) {
  std::set<std::string> pool;
  for (const auto& w : source_words) {
    for (auto& g : padded_word_char_grams(w, n_min, n_max)) pool.insert(std::move(g));
  }
  return pool;
}

}  // namespace driftva
