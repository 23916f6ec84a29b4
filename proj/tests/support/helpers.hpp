// Test-only support: fixture paths, deterministic generators, and independent
// oracle implementations (dense nested-loop featurizer, naive metric tally).
// The oracles deliberately avoid the library's counting and assembly code.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "driftva/corpus.hpp"
#include "driftva/textprep.hpp"
#include "driftva/util.hpp"

namespace testsup {

inline std::string source_dir() { return DRIFTVA_SOURCE_DIR; }

inline std::string fixture_path(const std::string& name) {
  return source_dir() + "/data/fixtures/" + name;
}

inline std::vector<driftva::VulnRecord> load_fixture_corpus() {
  return driftva::read_corpus(fixture_path("corpus_fixture.tsv"));
}

// ---------------------------------------------------------------------------
// dense brute-force feature aggregation (the criterion-1 oracle)
// ---------------------------------------------------------------------------

struct DenseAggregation {
  std::vector<std::string> word_cols;  // sorted
  std::vector<std::string> char_cols;  // sorted
  std::vector<std::vector<double>> matrix;  // docs x (word_cols + char_cols)
};

// Trim spaces by hand; keep grams that are one piece longer than one char.
inline std::set<std::string> oracle_filter_chars(const std::set<std::string>& raw) {
  std::set<std::string> out;
  for (const std::string& g : raw) {
    size_t b = 0, e = g.size();
    while (b < e && g[b] == ' ') ++b;
    while (e > b && g[e - 1] == ' ') --e;
    std::string t = g.substr(b, e - b);
    if (t.size() < 2) continue;
    if (t.find(' ') != std::string::npos) continue;
    out.insert(t);
  }
  return out;
}

// Occurrences of `term` among the doc's word n-grams for n = 1..n_max,
// counted by scanning every window and comparing strings.
inline double oracle_count_word(const std::vector<std::string>& tokens, const std::string& term,
                                int n_max) {
  double count = 0.0;
  const int len = static_cast<int>(tokens.size());
  for (int n = 1; n <= n_max; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      std::string gram = tokens[static_cast<size_t>(i)];
      for (int k = 1; k < n; ++k) gram += " " + tokens[static_cast<size_t>(i + k)];
      if (gram == term) count += 1.0;
    }
  }
  return count;
}

// Occurrences of `term` among the doc's within-word character grams: each
// token padded with one space per side, windows of every length in
// [n_min, n_max] taken and trimmed, multi-piece and single-char drops.
inline double oracle_count_char(const std::vector<std::string>& tokens, const std::string& term,
                                int n_min, int n_max) {
  double count = 0.0;
  for (const auto& token : tokens) {
    const std::string padded = " " + token + " ";
    const int len = static_cast<int>(padded.size());
    for (int n = n_min; n <= n_max; ++n) {
      for (int i = 0; i + n <= len; ++i) {
        std::string window = padded.substr(static_cast<size_t>(i), static_cast<size_t>(n));
        size_t b = 0, e = window.size();
        while (b < e && window[b] == ' ') ++b;
        while (e > b && window[e - 1] == ' ') --e;
        std::string t = window.substr(b, e - b);
        if (t.size() < 2 || t.find(' ') != std::string::npos) continue;
        if (t == term) count += 1.0;
      }
    }
  }
  return count;
}

/// Full dense reimplementation of the aggregation pipeline: filter chars,
/// set-subtract words, count both blocks per document, apply the idf formula
/// and per-block row normalization when tf-idf is on, append horizontally.
inline DenseAggregation brute_force_aggregate(const std::vector<std::vector<std::string>>& docs,
                                              const std::set<std::string>& word_grams,
                                              const std::set<std::string>& char_grams,
                                              int char_min, int char_max, int word_n_max,
                                              bool tfidf) {
  DenseAggregation out;
  std::set<std::string> chars = oracle_filter_chars(char_grams);
  std::set<std::string> words;
  for (const auto& w : word_grams) {
    if (!chars.count(w)) words.insert(w);
  }
  out.word_cols.assign(words.begin(), words.end());
  out.char_cols.assign(chars.begin(), chars.end());

  const size_t n_docs = docs.size();
  const size_t wn = out.word_cols.size(), cn = out.char_cols.size();
  std::vector<std::vector<double>> word_block(n_docs, std::vector<double>(wn, 0.0));
  std::vector<std::vector<double>> char_block(n_docs, std::vector<double>(cn, 0.0));
  for (size_t d = 0; d < n_docs; ++d) {
    for (size_t j = 0; j < wn; ++j) {
      word_block[d][j] = oracle_count_word(docs[d], out.word_cols[j], word_n_max);
    }
    for (size_t j = 0; j < cn; ++j) {
      char_block[d][j] = oracle_count_char(docs[d], out.char_cols[j], char_min, char_max);
    }
  }

  if (tfidf) {
    auto apply_tfidf = [&](std::vector<std::vector<double>>& block, size_t n_cols) {
      std::vector<double> idf(n_cols, 0.0);
      for (size_t j = 0; j < n_cols; ++j) {
        size_t df = 0;
        for (size_t d = 0; d < n_docs; ++d) {
          if (block[d][j] > 0.0) ++df;
        }
        idf[j] = std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) +
                 1.0;
      }
      for (size_t d = 0; d < n_docs; ++d) {
        double norm_sq = 0.0;
        for (size_t j = 0; j < n_cols; ++j) {
          if (block[d][j] == 0.0) continue;
          block[d][j] *= idf[j];
          norm_sq += block[d][j] * block[d][j];
        }
        if (norm_sq > 0.0) {
          const double inv = 1.0 / std::sqrt(norm_sq);
          for (size_t j = 0; j < n_cols; ++j) block[d][j] *= inv;
        }
      }
    };
    apply_tfidf(word_block, wn);
    apply_tfidf(char_block, cn);
  }

  out.matrix.assign(n_docs, std::vector<double>(wn + cn, 0.0));
  for (size_t d = 0; d < n_docs; ++d) {
    for (size_t j = 0; j < wn; ++j) out.matrix[d][j] = word_block[d][j];
    for (size_t j = 0; j < cn; ++j) out.matrix[d][wn + j] = char_block[d][j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// random toy corpora
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& toy_words() {
  static const std::vector<std::string> words = {
      "buffer", "overflow", "remote", "attack", "code", "script", "inject", "crash",
      "kernel", "driver", "packet", "header", "parser", "stack", "heap", "auth",
      "token", "query", "path", "file", "socket", "frame", "alloc", "index",
      "bound", "check", "race", "leak", "flood", "spoof"};
  return words;
}

struct ToyCorpus {
  std::vector<std::vector<std::string>> docs;
  std::set<std::string> word_grams;
  std::set<std::string> char_grams;
};

/// Random corpus plus random word/char gram pools drawn partly from the
/// corpus content, partly junk (cross-word grams, single chars, absent terms).
inline ToyCorpus random_toy_corpus(driftva::Rng& rng, size_t max_docs = 50,
                                   size_t max_terms = 200, int word_n_max = 2, int char_min = 2,
                                   int char_max = 4) {
  ToyCorpus out;
  const auto& words = toy_words();
  const size_t n_docs = 2 + rng.next_below(max_docs - 1);
  for (size_t d = 0; d < n_docs; ++d) {
    const size_t len = 2 + rng.next_below(10);
    std::vector<std::string> doc;
    for (size_t t = 0; t < len; ++t) doc.push_back(words[rng.next_below(words.size())]);
    out.docs.push_back(std::move(doc));
  }

  // Word pool: uni/bi-grams sampled from docs + a few absent terms. Tiny
  // corpora may expose fewer distinct grams than the target, so the loops
  // are attempt-bounded.
  for (size_t attempt = 0; attempt < 400 && out.word_grams.size() < max_terms / 2; ++attempt) {
    const auto& doc = out.docs[rng.next_below(out.docs.size())];
    size_t i = rng.next_below(doc.size());
    if (word_n_max > 1 && i + 1 < doc.size() && rng.next_below(3) == 0) {
      out.word_grams.insert(doc[i] + " " + doc[i + 1]);
    } else {
      out.word_grams.insert(doc[i]);
    }
    if (out.word_grams.size() > 8 && rng.next_below(8) == 0) break;
  }
  out.word_grams.insert("absentterm");

  // Char pool: padded grams of random corpus words + junk entries.
  size_t char_target = 4 + rng.next_below(max_terms / 4);
  for (size_t attempt = 0; attempt < 1000 && out.char_grams.size() < char_target; ++attempt) {
    const std::string& w = words[rng.next_below(words.size())];
    const std::string padded = " " + w + " ";
    const int n = char_min + static_cast<int>(rng.next_below(
                                 static_cast<uint64_t>(char_max - char_min + 1)));
    if (static_cast<int>(padded.size()) < n) continue;
    const size_t pos = rng.next_below(padded.size() - static_cast<size_t>(n) + 1);
    out.char_grams.insert(padded.substr(pos, static_cast<size_t>(n)));
  }
  out.char_grams.insert("x");
  out.char_grams.insert("a b");
  out.char_grams.insert(" z ");
  return out;
}

inline std::vector<driftva::PreprocessedDoc> to_docs(
    const std::vector<std::vector<std::string>>& token_docs) {
  std::vector<driftva::PreprocessedDoc> docs;
  for (const auto& t : token_docs) {
    driftva::PreprocessedDoc d;
    d.tokens = t;
    docs.push_back(std::move(d));
  }
  return docs;
}

// ---------------------------------------------------------------------------
// naive metric tally (criterion-3 oracle)
// ---------------------------------------------------------------------------

struct NaiveMetrics {
  double accuracy = 0.0;
  double macro_f = 0.0;
  double weighted_f = 0.0;
};

inline NaiveMetrics naive_metrics(const std::vector<uint8_t>& y_true,
                                  const std::vector<uint8_t>& y_pred, size_t n_classes) {
  NaiveMetrics m;
  size_t correct = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  double macro_sum = 0.0, weighted_sum = 0.0;
  for (size_t k = 0; k < n_classes; ++k) {
    size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
      if (y_true[i] == k) ++support;
      if (y_pred[i] == k && y_true[i] == k) ++tp;
      if (y_pred[i] == k && y_true[i] != k) ++fp;
      if (y_pred[i] != k && y_true[i] == k) ++fn;
    }
    double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    double r = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    double f = (p + r > 0) ? 2.0 * p * r / (p + r) : 0.0;
    macro_sum += f;
    weighted_sum += f * static_cast<double>(support);
  }
  m.macro_f = macro_sum / static_cast<double>(n_classes);
  m.weighted_f = weighted_sum / static_cast<double>(y_true.size());
  return m;
}

}  // namespace testsup
