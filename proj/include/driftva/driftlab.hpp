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
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "driftva/classifiers.hpp"
#include "driftva/features.hpp"
#include "driftva/metrics.hpp"
#include "driftva/timecv.hpp"
#include "driftva/vocab.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// vocabulary growth
// ---------------------------------------------------------------------------

/// For every year, the number of distinct word uni-grams (post-preprocessing)
/// that appear in that year's descriptions and in no earlier year. The counts
/// partition the corpus vocabulary by first appearance, so they sum to the
/// total distinct vocabulary size.
inline std::map<int, size_t> new_terms_per_year(const LabeledCorpus& corpus) {
  std::map<int, std::unordered_set<std::string>> tokens_by_year;
  for (size_t i = 0; i < corpus.size(); ++i) {
    auto& bucket = tokens_by_year[corpus.years[i]];
    for (const auto& t : corpus.docs[i].tokens) bucket.insert(t);
  }
  std::map<int, size_t> counts;
  std::unordered_set<std::string> seen;
  for (const auto& [year, tokens] : tokens_by_year) {  // std::map: ascending years
    size_t fresh = 0;
    for (const auto& t : tokens) {
      if (seen.insert(t).second) ++fresh;
    }
    counts[year] = fresh;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// all-zero word-feature cases
// ---------------------------------------------------------------------------

struct AllZeroCase {
  std::string cve_id;
  int year = 0;

  bool operator<(const AllZeroCase& o) const { return cve_id < o.cve_id; }
  bool operator==(const AllZeroCase&) const = default;
};

/// Walk each year y after the corpus' first year: build the word uni-gram
/// vocabulary (df strictly above min_df_ratio * docs) from years before y and
/// report the test-side documents (year >= y) with no vocabulary hit at all.
/// Each CVE is reported once, at the earliest y that exposes it; the output
/// is sorted by cve_id.
inline std::vector<AllZeroCase> find_all_zero_cases(const LabeledCorpus& corpus,
                                                    double min_df_ratio) {
  if (corpus.size() == 0) return {};
  int min_year = corpus.years[0], max_year = corpus.years[0];
  for (int y : corpus.years) {
    min_year = std::min(min_year, y);
    max_year = std::max(max_year, y);
  }

  std::vector<AllZeroCase> cases;
  std::unordered_set<std::string> reported;
  for (int y = min_year + 1; y <= max_year; ++y) {
    std::vector<size_t> before;
    for (size_t i = 0; i < corpus.size(); ++i) {
      if (corpus.years[i] < y) before.push_back(i);
    }
    if (before.empty()) continue;

    // Uni-gram document frequencies over the pre-y side.
    std::unordered_map<std::string, size_t> df;
    for (size_t i : before) {
      std::unordered_set<std::string> seen(corpus.docs[i].tokens.begin(),
                                           corpus.docs[i].tokens.end());
      for (const auto& t : seen) ++df[t];
    }
    const double threshold = min_df_ratio * static_cast<double>(before.size());
    std::unordered_set<std::string> vocab;
    for (const auto& [term, count] : df) {
      if (static_cast<double>(count) > threshold) vocab.insert(term);
    }

    for (size_t i = 0; i < corpus.size(); ++i) {
      if (corpus.years[i] < y) continue;
      if (reported.count(corpus.cve_ids[i])) continue;
      bool any_hit = false;
      for (const auto& t : corpus.docs[i].tokens) {
        if (vocab.count(t)) {
          any_hit = true;
          break;
        }
      }
      if (!any_hit) {
        reported.insert(corpus.cve_ids[i]);
        cases.push_back({corpus.cve_ids[i], corpus.years[i]});
      }
    }
  }
  std::sort(cases.begin(), cases.end());
  return cases;
}

// ---------------------------------------------------------------------------
// character coverage
// ---------------------------------------------------------------------------

struct CoverageResult {
  bool ok = true;
  std::vector<std::string> counterexamples;  // cve ids with zero char features
  size_t n_checked = 0;
  size_t vocab_size = 0;
};

/// Build the filtered character vocabulary from data up to source_year only
/// (high-frequency tokens, df strictly above hf_ratio), then check that every
/// description in every later year produces at least one nonzero character
/// feature in the [n_min, n_max] range.
inline CoverageResult verify_char_coverage(const LabeledCorpus& corpus, int source_year,
                                           int n_min, int n_max, double hf_ratio = 0.10) {
  std::vector<PreprocessedDoc> source_docs;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.years[i] <= source_year) source_docs.push_back(corpus.docs[i]);
  }
  if (source_docs.empty()) {
    throw DataError("verify_char_coverage: no documents at or before year " +
                    std::to_string(source_year));
  }
  auto source_words = build_char_source_words(source_docs, hf_ratio);
  auto pool = build_char_gram_pool(source_words, n_min, n_max);
  auto selected = filter_char_features(pool);

  CoverageResult result;
  result.vocab_size = selected.size();
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.years[i] <= source_year) continue;
    ++result.n_checked;
    bool any_hit = false;
    for (const auto& token : corpus.docs[i].tokens) {
      for_each_token_char_gram(token, n_min, n_max, [&](std::string_view g) {
        if (!any_hit && selected.count(std::string(g))) any_hit = true;
      });
      if (any_hit) break;
    }
    if (!any_hit) {
      result.ok = false;
      result.counterexamples.push_back(corpus.cve_ids[i]);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// model-variant comparison (character-word vs word-only vs character-only)
// ---------------------------------------------------------------------------

struct VariantReport {
  std::string name;
  MetricTriple metrics;
  double density = 0.0;  // nonzero fraction of the training feature matrix
  size_t n_features = 0;
};

struct ModelComparison {
  std::vector<VariantReport> variants;  // cwm, wom, com

  const VariantReport& at(const std::string& name) const {
    for (const auto& v : variants) {
      if (v.name == name) return v;
    }
    throw InternalError("unknown variant: " + name);
  }
};

struct CompareOptions {
  double min_df_ratio = 0.001;
  double hf_ratio = 0.10;
  CharFilterParams char_params;
  uint64_t seed = 42;
  /// The word-only baseline: forest with a pinned per-split feature count.
  size_t wom_split_features = 40;
};

/// Table-style comparison of the aggregated model against the word-only and
/// character-only baselines on a year split. The aggregated and char-only
/// variants use the characteristic's optimal classifier and configuration;
/// the word-only baseline is a 100-tree forest on uni-gram counts.
inline ModelComparison compare_models(const LabeledCorpus& train, const LabeledCorpus& test,
                                      Characteristic vc, const ClassifierSpec& optimal_spec,
                                      NlpConfig optimal_config, const CompareOptions& opt = {}) {
  ModelComparison cmp;

  std::vector<size_t> train_idx(train.size()), test_idx(test.size());
  for (size_t i = 0; i < train.size(); ++i) train_idx[i] = i;
  for (size_t i = 0; i < test.size(); ++i) test_idx[i] = i;
  auto y_train = train.labels_at(train_idx, vc);
  auto y_test = test.labels_at(test_idx, vc);

  Vocabulary word_vocab =
      build_word_vocab(train.docs, optimal_config.word_ngram_max, opt.min_df_ratio);
  std::set<std::string> word_terms(word_vocab.terms().begin(), word_vocab.terms().end());
  auto source_words = build_char_source_words(train.docs, opt.hf_ratio);
  auto char_pool =
      build_char_gram_pool(source_words, opt.char_params.min_ngram, opt.char_params.max_ngram);

  auto evaluate_variant = [&](const std::string& name, const std::set<std::string>& words,
                              const std::set<std::string>& chars, const ClassifierSpec& spec,
                              NlpConfig config, size_t split_features) {
    auto agg = aggregate(train.docs, words, chars, opt.char_params, config);
    SparseMatrix x_test_w = agg.model_w.transform(test.docs);
    SparseMatrix x_test_c = agg.model_c.transform(test.docs);
    SparseMatrix x_test = SparseMatrix::horizontal_append(x_test_w, x_test_c);
    TrainedClassifier clf = fit_classifier(spec, agg.x_agg, y_train, opt.seed, split_features);
    auto y_pred = clf.predict(x_test);
    VariantReport report;
    report.name = name;
    report.metrics = metric_triple(y_test, y_pred, kClassesPerCharacteristic);
    report.density = agg.x_agg.density();
    report.n_features = agg.x_agg.n_cols();
    cmp.variants.push_back(std::move(report));
  };

  // CWM: aggregated word + char features, optimal classifier and config.
  evaluate_variant("cwm", word_terms, char_pool, optimal_spec, optimal_config, 0);

  // WoM: uni-gram bag of words, forest with the pinned split-feature count.
  Vocabulary bow_vocab = build_word_vocab(train.docs, 1, opt.min_df_ratio);
  std::set<std::string> bow_terms(bow_vocab.terms().begin(), bow_vocab.terms().end());
  ClassifierSpec wom_spec = ClassifierSpec::tuned(ClassifierKind::rf, false);
  evaluate_variant("wom", bow_terms, {}, wom_spec, nlp_config(1), opt.wom_split_features);

  // CoM: character features only, optimal classifier and config.
  evaluate_variant("com", {}, char_pool, optimal_spec, optimal_config, 0);

  return cmp;
}

// ---------------------------------------------------------------------------
// combined report
// ---------------------------------------------------------------------------

struct DriftReport {
  std::map<int, size_t> new_terms_by_year;
  std::vector<AllZeroCase> all_zero_cases;
  bool coverage_ok = false;
  size_t coverage_checked = 0;
  std::vector<std::string> coverage_counterexamples;
  /// Nonzero fraction of the train-side feature matrix per model variant.
  std::map<std::string, double> density;
};

struct DriftOptions {
  double min_df_ratio = 0.001;
  double hf_ratio = 0.10;
  int coverage_n_min = 2;
  int coverage_n_max = 3;
  CharFilterParams char_params;
  NlpConfig config = nlp_config(1);
};

/// The descriptive analyses: new-term counts, all-zero cases, character
/// coverage from the earliest year, and the variant feature densities
/// (feature matrices only; no classifiers are trained here).
inline DriftReport analyze_drift(const LabeledCorpus& corpus, const DriftOptions& opt = {}) {
  DriftReport report;
  report.new_terms_by_year = new_terms_per_year(corpus);
  report.all_zero_cases = find_all_zero_cases(corpus, opt.min_df_ratio);

  int min_year = corpus.years.empty() ? 0 : *std::min_element(corpus.years.begin(),
                                                              corpus.years.end());
  auto coverage = verify_char_coverage(corpus, min_year, opt.coverage_n_min, opt.coverage_n_max,
                                       opt.hf_ratio);
  report.coverage_ok = coverage.ok;
  report.coverage_checked = coverage.n_checked;
  report.coverage_counterexamples = coverage.counterexamples;

  Vocabulary word_vocab = build_word_vocab(corpus.docs, opt.config.word_ngram_max,
                                           opt.min_df_ratio);
  std::set<std::string> word_terms(word_vocab.terms().begin(), word_vocab.terms().end());
  auto source_words = build_char_source_words(corpus.docs, opt.hf_ratio);
  auto char_pool = build_char_gram_pool(source_words, opt.char_params.min_ngram,
                                        opt.char_params.max_ngram);

  auto agg_cwm = aggregate(corpus.docs, word_terms, char_pool, opt.char_params, opt.config);
  report.density["cwm"] = agg_cwm.x_agg.density();
  auto agg_wom = aggregate(corpus.docs, word_terms, {}, opt.char_params, opt.config);
  report.density["wom"] = agg_wom.x_agg.density();
  auto agg_com = aggregate(corpus.docs, {}, char_pool, opt.char_params, opt.config);
  report.density["com"] = agg_com.x_agg.density();
  return report;
}

}  // namespace driftva
