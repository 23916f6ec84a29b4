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
#include <vector>

#include "driftva/classifiers.hpp"
#include "driftva/corpus.hpp"
#include "driftva/features.hpp"
#include "driftva/metrics.hpp"
#include "driftva/textprep.hpp"
#include "driftva/util.hpp"
#include "driftva/vocab.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// preprocessed, labeled corpus view
// ---------------------------------------------------------------------------

/// Filtered corpus with preprocessing applied once up front; folds and grid
/// cells then work on index lists into it.
struct LabeledCorpus {
  std::vector<std::string> cve_ids;
  std::vector<int> years;
  std::vector<PreprocessedDoc> docs;
  std::vector<LabelSet> labels;

  size_t size() const { return docs.size(); }

  static LabeledCorpus from_records(const std::vector<VulnRecord>& records,
                                    const StopWordList& stopwords) {
    LabeledCorpus c;
    for (const auto& r : records) {
      if (!r.labels.has_value()) continue;
      c.cve_ids.push_back(r.cve_id);
      c.years.push_back(r.year);
      c.docs.push_back(preprocess(r.description, stopwords));
      c.labels.push_back(*r.labels);
    }
    return c;
  }

  std::vector<PreprocessedDoc> docs_at(const std::vector<size_t>& idx) const {
    std::vector<PreprocessedDoc> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(docs[i]);
    return out;
  }

  std::vector<uint8_t> labels_at(const std::vector<size_t>& idx, Characteristic vc) const {
    std::vector<uint8_t> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(labels[i][vc]);
    return out;
  }
};

// ---------------------------------------------------------------------------
// time folds
// ---------------------------------------------------------------------------

/// One pass of the expanding-window scheme: train on everything up to
/// validate_year - 1, validate on validate_year. Fold k validates on the
/// final training-set year.
struct TimeFold {
  int fold_index = 1;  // 1..k
  int train_year_min = 0;
  int train_year_max = 0;  // == validate_year - 1
  int validate_year = 0;
};

inline std::vector<TimeFold> make_folds(const std::vector<int>& record_years, int k) {
  if (k < 1) throw UsageError("fold count must be >= 1");
  std::set<int> years(record_years.begin(), record_years.end());
  if (static_cast<int>(years.size()) < k + 1) {
    throw DataError("time-based CV needs at least k+1 distinct years (k=" + std::to_string(k) +
                    ", distinct years=" + std::to_string(years.size()) + ")");
  }
  const int x = *years.rbegin();  // final year in the training set
  const int y_min = *years.begin();
  std::vector<TimeFold> folds;
  for (int i = 1; i <= k; ++i) {
    TimeFold f;
    f.fold_index = i;
    f.validate_year = x - k + i;
    f.train_year_min = y_min;
    f.train_year_max = f.validate_year - 1;
    folds.push_back(f);
  }
  return folds;
}

inline std::vector<TimeFold> make_folds(const std::vector<VulnRecord>& train, int k) {
  std::vector<int> years;
  years.reserve(train.size());
  for (const auto& r : train) years.push_back(r.year);
  return make_folds(years, k);
}

/// Record indices belonging to each side of a fold. Assignment is by year
/// only; records between train_year_max and validate_year cannot exist by
/// construction of make_folds.
struct FoldIndices {
  std::vector<size_t> train;
  std::vector<size_t> validate;
};

inline FoldIndices fold_indices(const std::vector<int>& years, const TimeFold& fold) {
  FoldIndices out;
  for (size_t i = 0; i < years.size(); ++i) {
    if (years[i] <= fold.train_year_max) out.train.push_back(i);
    else if (years[i] == fold.validate_year) out.validate.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// candidate evaluation
// ---------------------------------------------------------------------------

struct FoldScore {
  MetricTriple triple;
  bool degenerate = false;  // some class absent from the fold's training side
};

struct EvalOptions {
  double min_df_ratio = 0.001;
  uint64_t seed = 42;
};

/// Train-side artifacts shared by every classifier evaluated on one
/// (fold, config) cell: vocabulary and features are fitted on the training
/// indices only, so no validate-year information can leak into them.
struct FoldFeatures {
  FeatureModel model;
  SparseMatrix x_train;
  SparseMatrix x_validate;
};

inline FoldFeatures build_fold_features(const LabeledCorpus& corpus,
                                        const std::vector<size_t>& train_idx,
                                        const std::vector<size_t>& validate_idx, NlpConfig config,
                                        double min_df_ratio) {
  FoldFeatures f;
  auto train_docs = corpus.docs_at(train_idx);
  Vocabulary vocab = build_word_vocab(train_docs, config.word_ngram_max, min_df_ratio);
  std::set<std::string> terms(vocab.terms().begin(), vocab.terms().end());
  f.model = fit_feature_model(terms, config, train_docs, FeatureKind::word);
  f.x_train = f.model.transform(train_docs);
  f.x_validate = f.model.transform(corpus.docs_at(validate_idx));
  return f;
}

inline FoldScore score_on_validate(const FoldFeatures& feats, const LabeledCorpus& corpus,
                                   const std::vector<size_t>& train_idx,
                                   const std::vector<size_t>& validate_idx,
                                   const ClassifierSpec& spec, Characteristic vc,
                                   uint64_t seed, uint64_t* work_units) {
  auto y_train = corpus.labels_at(train_idx, vc);
  auto y_val = corpus.labels_at(validate_idx, vc);
  TrainedClassifier clf = fit_classifier(spec, feats.x_train, y_train, seed);
  if (work_units) *work_units += clf.train_work_units;
  auto y_pred = clf.predict(feats.x_validate);
  FoldScore score;
  score.triple = metric_triple(y_val, y_pred, kClassesPerCharacteristic);
  score.degenerate = clf.n_trained_classes() < kClassesPerCharacteristic;
  return score;
}

/// One grid cell on one fold, self-contained (fits vocabulary, features and
/// the classifier on the training side only, scores on the validate side).
inline FoldScore evaluate_candidate(const LabeledCorpus& corpus, const TimeFold& fold,
                                    const ClassifierSpec& spec, NlpConfig config,
                                    Characteristic vc, const EvalOptions& opt = {},
                                    uint64_t* work_units = nullptr) {
  auto idx = fold_indices(corpus.years, fold);
  auto feats = build_fold_features(corpus, idx.train, idx.validate, config, opt.min_df_ratio);
  return score_on_validate(feats, corpus, idx.train, idx.validate, spec, vc, opt.seed,
                           work_units);
}

// ---------------------------------------------------------------------------
// model selection
// ---------------------------------------------------------------------------

struct CandidateResult {
  ClassifierSpec spec;
  NlpConfig config;
  std::vector<FoldScore> folds;
  MetricTriple mean;
  uint64_t work_units = 0;  // deterministic training-cost proxy

  bool degenerate_any() const {
    for (const auto& f : folds) {
      if (f.degenerate) return true;
    }
    return false;
  }
};

struct SelectionResult {
  Characteristic characteristic = Characteristic::confidentiality;
  int k = 5;
  size_t best_index = 0;             // into candidates
  std::vector<CandidateResult> candidates;  // stable enumeration order

  const CandidateResult& best() const { return candidates[best_index]; }
};

namespace detail {

inline MetricTriple mean_of(const std::vector<FoldScore>& folds) {
  MetricTriple m;
  for (const auto& f : folds) {
    m.accuracy += f.triple.accuracy;
    m.macro_f += f.triple.macro_f;
    m.weighted_f += f.triple.weighted_f;
  }
  const double n = static_cast<double>(folds.size());
  m.accuracy /= n;
  m.macro_f /= n;
  m.weighted_f /= n;
  return m;
}

/// Selection ladder, applied as a total order: mean accuracy, then mean
/// macro-F, then mean weighted-F, then fewer tuning hyperparameters, then
/// lower recorded training cost, then stable enumeration order.
inline bool candidate_better(const CandidateResult& a, size_t a_pos, const CandidateResult& b,
                             size_t b_pos) {
  if (a.mean.accuracy != b.mean.accuracy) return a.mean.accuracy > b.mean.accuracy;
  if (a.mean.macro_f != b.mean.macro_f) return a.mean.macro_f > b.mean.macro_f;
  if (a.mean.weighted_f != b.mean.weighted_f) return a.mean.weighted_f > b.mean.weighted_f;
  if (a.spec.hyper_count() != b.spec.hyper_count()) {
    return a.spec.hyper_count() < b.spec.hyper_count();
  }
  if (a.work_units != b.work_units) return a.work_units < b.work_units;
  return a_pos < b_pos;
}

}  // namespace detail

/// Generic selection over explicit folds (shared by the temporal and
/// non-temporal protocols). Vocabulary and features are refit per fold on
/// that fold's training indices.
inline SelectionResult select_model_with_folds(const LabeledCorpus& corpus,
                                               const std::vector<FoldIndices>& folds,
                                               const std::vector<ClassifierKind>& kinds,
                                               const std::vector<int>& config_ids,
                                               Characteristic vc, const EvalOptions& opt = {},
                                               ThreadPool* pool = nullptr) {
  if (kinds.empty() || config_ids.empty()) throw UsageError("empty candidate grid");
  SelectionResult result;
  result.characteristic = vc;
  result.k = static_cast<int>(folds.size());

  const size_t n_cells = kinds.size() * config_ids.size();
  result.candidates.resize(n_cells);
  for (size_t ki = 0; ki < kinds.size(); ++ki) {
    for (size_t ci = 0; ci < config_ids.size(); ++ci) {
      auto& cand = result.candidates[ki * config_ids.size() + ci];
      cand.config = nlp_config(config_ids[ci]);
      cand.spec = ClassifierSpec::tuned(kinds[ki], cand.config.use_tfidf);
      cand.folds.resize(folds.size());
    }
  }

  // One job per (fold, config): the feature matrices are shared by all
  // classifier kinds in the cell. Results land in index-addressed slots, so
  // scheduling order cannot affect the outcome.
  std::vector<std::vector<uint64_t>> cell_work(folds.size() * config_ids.size());
  auto run_cell = [&](size_t job) {
    const size_t fi = job / config_ids.size();
    const size_t ci = job % config_ids.size();
    const NlpConfig config = nlp_config(config_ids[ci]);
    auto feats = build_fold_features(corpus, folds[fi].train, folds[fi].validate, config,
                                     opt.min_df_ratio);
    cell_work[job].assign(kinds.size(), 0);
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
      auto& cand = result.candidates[ki * config_ids.size() + ci];
      cand.folds[fi] = score_on_validate(feats, corpus, folds[fi].train, folds[fi].validate,
                                         cand.spec, vc, opt.seed, &cell_work[job][ki]);
    }
  };
  const size_t n_jobs = folds.size() * config_ids.size();
  if (pool) {
    pool->parallel_for(n_jobs, run_cell);
  } else {
    for (size_t j = 0; j < n_jobs; ++j) run_cell(j);
  }

  for (size_t ki = 0; ki < kinds.size(); ++ki) {
    for (size_t ci = 0; ci < config_ids.size(); ++ci) {
      auto& cand = result.candidates[ki * config_ids.size() + ci];
      cand.mean = detail::mean_of(cand.folds);
      for (size_t fi = 0; fi < folds.size(); ++fi) {
        cand.work_units += cell_work[fi * config_ids.size() + ci][ki];
      }
    }
  }

  result.best_index = 0;
  for (size_t i = 1; i < result.candidates.size(); ++i) {
    if (detail::candidate_better(result.candidates[i], i,
                                 result.candidates[result.best_index], result.best_index)) {
      result.best_index = i;
    }
  }
  return result;
}

/// Time-based k-fold selection (the default protocol).
inline SelectionResult select_model(const LabeledCorpus& corpus, int k,
                                    const std::vector<ClassifierKind>& kinds,
                                    const std::vector<int>& config_ids, Characteristic vc,
                                    const EvalOptions& opt = {}, ThreadPool* pool = nullptr) {
  auto time_folds = make_folds(corpus.years, k);
  std::vector<FoldIndices> folds;
  folds.reserve(time_folds.size());
  for (const auto& f : time_folds) folds.push_back(fold_indices(corpus.years, f));
  return select_model_with_folds(corpus, folds, kinds, config_ids, vc, opt, pool);
}

// ---------------------------------------------------------------------------
// non-temporal baseline folds
// ---------------------------------------------------------------------------

/// Random k-fold split ignoring year; optionally stratified by the given
/// characteristic's label. Fold i validates on bucket i and trains on the
/// rest.
inline std::vector<FoldIndices> nontemporal_folds(const LabeledCorpus& corpus, int k,
                                                  bool stratify, Characteristic vc,
                                                  uint64_t seed) {
  if (k < 2) throw UsageError("non-temporal CV needs k >= 2");
  const size_t n = corpus.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<size_t>> buckets(static_cast<size_t>(k));
  if (!stratify) {
    for (size_t i = 0; i < n; ++i) buckets[i % static_cast<size_t>(k)].push_back(order[i]);
  } else {
    // Round-robin within each class keeps per-fold class ratios within one
    // record of the global mix.
    std::map<uint8_t, size_t> next_bucket;
    for (size_t i = 0; i < n; ++i) {
      const uint8_t cls = corpus.labels[order[i]][vc];
      size_t& b = next_bucket[cls];
      buckets[b].push_back(order[i]);
      b = (b + 1) % static_cast<size_t>(k);
    }
  }
  std::vector<FoldIndices> folds(static_cast<size_t>(k));
  for (size_t f = 0; f < static_cast<size_t>(k); ++f) {
    folds[f].validate = buckets[f];
    for (size_t g = 0; g < static_cast<size_t>(k); ++g) {
      if (g == f) continue;
      folds[f].train.insert(folds[f].train.end(), buckets[g].begin(), buckets[g].end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
    std::sort(folds[f].validate.begin(), folds[f].validate.end());
  }
  return folds;
}

/// Signed cross-validated-minus-test gap in weighted F.
inline double overfit_gap(double cv_mean_weighted_f, double test_weighted_f) {
  return cv_mean_weighted_f - test_weighted_f;
}

}  // namespace driftva
