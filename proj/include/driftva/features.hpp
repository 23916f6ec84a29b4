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

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/sparse.hpp"
#include "driftva/textprep.hpp"
#include "driftva/util.hpp"
#include "driftva/vocab.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// character-feature filtering (the aggregation algorithm's selection steps)
// ---------------------------------------------------------------------------

struct CharFilterParams {
  int min_ngram = 2;
  int max_ngram = 6;
  /// Compatibility switch: widen the transform range to min_ngram-1. Length-1
  /// grams never reach the vocabulary, so this only affects multiplicities of
  /// boundary grams; the default keeps the effective range at [min, max].
  bool legacy_min_minus_one = false;

  void validate() const {
    if (min_ngram < 2 || min_ngram > max_ngram) {
      throw UsageError("char n-gram range must satisfy 2 <= min <= max, got [" +
                       std::to_string(min_ngram) + "," + std::to_string(max_ngram) + "]");
    }
  }

  int effective_min() const { return legacy_min_minus_one ? min_ngram - 1 : min_ngram; }
};

/// Keep only character grams that sit inside a single word and are longer
/// than one character; grams are stored in their space-trimmed form. Cross-
/// word grams and single characters are dropped.
inline std::set<std::string> filter_char_features(const std::set<std::string>& char_grams) {
  std::set<std::string> selected;
  for (const auto& gram : char_grams) {
    auto tokens = split_ws(gram);
    if (tokens.size() == 1 && tokens[0].size() > 1) selected.insert(std::move(tokens[0]));
  }
  return selected;
}

/// Word grams minus the selected character grams, so a full word captured as
/// a character feature is not represented twice.
inline std::set<std::string> dedup_words(const std::set<std::string>& word_grams,
                                         const std::set<std::string>& selected_chars) {
  std::set<std::string> out;
  for (const auto& w : word_grams) {
    if (!selected_chars.count(w)) out.insert(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// gram extraction shared by fitting and transforming
// ---------------------------------------------------------------------------

/// Visit the within-word character grams of one token: the token is padded
/// with a space on both ends, windows of each length in [n_min, n_max] are
/// taken, trimmed, and kept when they are a single piece of length >= 2.
/// Boundary windows therefore contribute their trimmed forms once per window,
/// which is the one extraction definition used everywhere (vocabulary
/// construction, model fitting, and document transform).
template <typename Fn>
inline void for_each_token_char_gram(const std::string& token, int n_min, int n_max, Fn&& fn) {
  std::string padded;
  padded.reserve(token.size() + 2);
  padded += ' ';
  padded += token;
  padded += ' ';
  const int len = static_cast<int>(padded.size());
  for (int n = n_min; n <= n_max; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      std::string_view window(padded.data() + i, static_cast<size_t>(n));
      std::string_view t = trim_view(window);
      if (t.size() < 2) continue;
      if (t.find(' ') != std::string_view::npos) continue;
      fn(t);
    }
  }
}

// ---------------------------------------------------------------------------
// feature models
// ---------------------------------------------------------------------------

enum class FeatureKind : uint8_t { word = 0, char_gram = 1 };

/// Frozen mapping from preprocessed text to one sparse feature row: a fixed
/// vocabulary (term -> column), the weighting scheme, and the idf statistics
/// when the scheme is tf-idf. Instances are immutable after fitting.
class FeatureModel {
 public:
  FeatureModel() = default;

  FeatureKind kind() const { return kind_; }
  bool use_tfidf() const { return use_tfidf_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  size_t n_fit_docs() const { return n_fit_docs_; }
  size_t n_features() const { return vocab_.size(); }
  bool empty_vocabulary() const { return vocab_.empty(); }
  int word_ngram_max() const { return word_ngram_max_; }
  int char_min() const { return char_min_; }
  int char_max() const { return char_max_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<size_t>& fit_df() const { return fit_df_; }

  /// Term counts of one document restricted to the vocabulary. Word models
  /// count word n-grams; char models count within-word character grams.
  std::map<size_t, double> count_row(const PreprocessedDoc& doc) const {
    std::map<size_t, double> counts;
    if (kind_ == FeatureKind::word) {
      for (const auto& gram : word_ngrams(doc.tokens, word_ngram_max_)) {
        if (auto idx = vocab_.find(gram)) counts[*idx] += 1.0;
      }
    } else {
      for (const auto& token : doc.tokens) {
        for_each_token_char_gram(token, char_min_, char_max_, [&](std::string_view g) {
          if (auto idx = vocab_.find(g)) counts[*idx] += 1.0;
        });
      }
    }
    return counts;
  }

  /// Transform documents into the sparse feature matrix. tf-idf rows are
  /// scaled by idf and L2-normalized; term-frequency rows stay raw counts.
  SparseMatrix transform(const std::vector<PreprocessedDoc>& docs) const {
    SparseBuilder builder(docs.size(), vocab_.size());
    for (size_t d = 0; d < docs.size(); ++d) {
      auto counts = count_row(docs[d]);
      if (!use_tfidf_) {
        for (const auto& [col, v] : counts) builder.add(d, col, v);
        continue;
      }
      // Norm accumulated in ascending column order (map iteration) so the
      // result is bit-stable.
      double norm_sq = 0.0;
      for (auto& [col, v] : counts) {
        v *= idf_[col];
        norm_sq += v * v;
      }
      if (norm_sq > 0.0) {
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (const auto& [col, v] : counts) builder.add(d, col, v * inv_norm);
      }
    }
    return std::move(builder).build();
  }

  std::string to_string() const {
    std::ostringstream out;
    out << "# driftva feature-model v1\n";
    out << "kind " << (kind_ == FeatureKind::word ? "word" : "char") << "\n";
    out << "weighting " << (use_tfidf_ ? "tfidf" : "tf") << "\n";
    out << "n_fit_docs " << n_fit_docs_ << "\n";
    out << "word_ngram_max " << word_ngram_max_ << "\n";
    out << "char_min " << char_min_ << "\n";
    out << "char_max " << char_max_ << "\n";
    out << "n_terms " << vocab_.size() << "\n";
    for (size_t i = 0; i < vocab_.size(); ++i) {
      out << vocab_.term(i) << '\t' << fit_df_[i];
      if (use_tfidf_) out << '\t' << fmt_double(idf_[i]);
      out << '\n';
    }
    return out.str();
  }

  static FeatureModel parse(std::string_view content, std::string_view origin = "<model>") {
    FeatureModel m;
    auto lines = split(content, '\n');
    size_t i = 0;
    if (lines.empty() || lines[0] != "# driftva feature-model v1") {
      throw DataError(std::string(origin) + ": not a feature-model block");
    }
    ++i;
    size_t n_terms = 0;
    for (; i < lines.size(); ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() < 2) break;
      if (f[0] == "kind") m.kind_ = (f[1] == "char") ? FeatureKind::char_gram : FeatureKind::word;
      else if (f[0] == "weighting") m.use_tfidf_ = (f[1] == "tfidf");
      else if (f[0] == "n_fit_docs") m.n_fit_docs_ = std::stoull(f[1]);
      else if (f[0] == "word_ngram_max") m.word_ngram_max_ = std::stoi(f[1]);
      else if (f[0] == "char_min") m.char_min_ = std::stoi(f[1]);
      else if (f[0] == "char_max") m.char_max_ = std::stoi(f[1]);
      else if (f[0] == "n_terms") { n_terms = std::stoull(f[1]); ++i; break; }
      else break;
    }
    std::vector<std::pair<std::string, size_t>> term_dfs;
    for (size_t t = 0; t < n_terms; ++t, ++i) {
      if (i >= lines.size()) throw DataError(std::string(origin) + ": truncated term table");
      auto f = split(lines[i], '\t');
      if (f.size() < 2) throw DataError(std::string(origin) + ": bad term line: " + lines[i]);
      term_dfs.emplace_back(f[0], std::stoull(f[1]));
      m.fit_df_.push_back(std::stoull(f[1]));
      if (m.use_tfidf_) {
        if (f.size() < 3) throw DataError(std::string(origin) + ": missing idf: " + lines[i]);
        m.idf_.push_back(std::stod(f[2]));
      }
    }
    m.vocab_ = Vocabulary::from_term_dfs(std::move(term_dfs), 0.0, m.n_fit_docs_);
    if (m.vocab_.size() != m.fit_df_.size()) {
      throw DataError(std::string(origin) + ": duplicate or unsorted terms in model");
    }
    return m;
  }

  /// Consumed number of lines when parsing out of a larger container.
  static size_t block_line_count(const std::vector<std::string>& lines, size_t start) {
    // header + 7 fixed fields + term lines
    if (start >= lines.size()) throw DataError("feature-model block out of range");
    size_t n_terms = 0;
    for (size_t i = start; i < lines.size(); ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() == 2 && f[0] == "n_terms") {
        n_terms = std::stoull(f[1]);
        return (i - start) + 1 + n_terms;
      }
    }
    throw DataError("feature-model block missing n_terms");
  }

 private:
  friend FeatureModel fit_feature_model(const std::set<std::string>&, NlpConfig,
                                        const std::vector<PreprocessedDoc>&, FeatureKind, int,
                                        int);
  friend FeatureModel make_empty_feature_model(FeatureKind, NlpConfig, size_t, int, int);

  FeatureKind kind_ = FeatureKind::word;
  bool use_tfidf_ = false;
  Vocabulary vocab_;
  std::vector<double> idf_;       // present iff use_tfidf_
  std::vector<size_t> fit_df_;    // document frequency over the fit docs
  size_t n_fit_docs_ = 0;
  int word_ngram_max_ = 1;
  int char_min_ = 2;
  int char_max_ = 6;
};

inline FeatureModel make_empty_feature_model(FeatureKind kind, NlpConfig config, size_t n_docs,
                                             int char_min = 2, int char_max = 6) {
  FeatureModel m;
  m.kind_ = kind;
  m.use_tfidf_ = config.use_tfidf;
  m.n_fit_docs_ = n_docs;
  m.word_ngram_max_ = config.word_ngram_max;
  m.char_min_ = char_min;
  m.char_max_ = char_max;
  return m;
}

/// Freeze a term -> column mapping over the given vocabulary and, for tf-idf,
/// compute idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1 over the fit docs.
inline FeatureModel fit_feature_model(const std::set<std::string>& vocab_terms, NlpConfig config,
                                      const std::vector<PreprocessedDoc>& docs, FeatureKind kind,
                                      int char_min = 2, int char_max = 6) {
  if (vocab_terms.empty()) throw DataError("fit_feature_model: empty vocabulary");
  FeatureModel m;
  m.kind_ = kind;
  m.use_tfidf_ = config.use_tfidf;
  m.n_fit_docs_ = docs.size();
  m.word_ngram_max_ = config.word_ngram_max;
  m.char_min_ = char_min;
  m.char_max_ = char_max;
  m.vocab_ = Vocabulary::from_terms(vocab_terms);

  m.fit_df_.assign(m.vocab_.size(), 0);
  for (const auto& doc : docs) {
    auto counts = m.count_row(doc);  // uses vocab_ + ranges set above
    for (const auto& [col, v] : counts) {
      (void)v;
      ++m.fit_df_[col];
    }
  }
  if (m.use_tfidf_) {
    m.idf_.resize(m.vocab_.size());
    const double n = static_cast<double>(docs.size());
    for (size_t i = 0; i < m.vocab_.size(); ++i) {
      m.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(m.fit_df_[i]))) + 1.0;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// aggregation: word block then char block, one weighting scheme for both
// ---------------------------------------------------------------------------

struct AggregateResult {
  SparseMatrix x_agg;
  FeatureModel model_w;
  FeatureModel model_c;
};

/// Build the aggregated feature matrix from raw word and character gram
/// pools: filter the character grams to within-word grams, subtract them
/// from the word grams, fit both feature models on the input docs, transform,
/// and append horizontally (all word columns, then all char columns).
inline AggregateResult aggregate(const std::vector<PreprocessedDoc>& docs,
                                 const std::set<std::string>& word_grams,
                                 const std::set<std::string>& char_grams,
                                 const CharFilterParams& params, NlpConfig config) {
  params.validate();
  auto selected_chars = filter_char_features(char_grams);
  auto diff_words = dedup_words(word_grams, selected_chars);
  if (diff_words.empty() && selected_chars.empty()) {
    throw DataError("aggregate: both word and char vocabularies are empty");
  }

  AggregateResult r;
  r.model_w = diff_words.empty()
                  ? make_empty_feature_model(FeatureKind::word, config, docs.size())
                  : fit_feature_model(diff_words, config, docs, FeatureKind::word);
  r.model_c = selected_chars.empty()
                  ? make_empty_feature_model(FeatureKind::char_gram, config, docs.size(),
                                             params.effective_min(), params.max_ngram)
                  : fit_feature_model(selected_chars, config, docs, FeatureKind::char_gram,
                                      params.effective_min(), params.max_ngram);
  SparseMatrix x_word = r.model_w.transform(docs);
  SparseMatrix x_char = r.model_c.transform(docs);
  r.x_agg = SparseMatrix::horizontal_append(x_word, x_char);
  return r;
}

}  // namespace driftva
