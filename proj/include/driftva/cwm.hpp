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

#include <optional>
#include <sstream>
#include <string>

#include "driftva/artifact.hpp"
#include "driftva/classifiers.hpp"
#include "driftva/corpus.hpp"
#include "driftva/features.hpp"
#include "driftva/reduce.hpp"
#include "driftva/timecv.hpp"

namespace driftva {

/// The deployable unit for one characteristic: the paired word and character
/// feature models plus the trained classifier, and optionally the low-rank
/// compression (projection fitted on the aggregated training matrix, with the
/// classifier retrained on embeddings).
struct CwmModel {
  Characteristic characteristic = Characteristic::confidentiality;
  NlpConfig config;
  CharFilterParams char_params;
  FeatureModel model_w;
  FeatureModel model_c;
  TrainedClassifier classifier;
  std::optional<LsaModel> lsa;  // set for compressed variants

  size_t n_features() const { return model_w.n_features() + model_c.n_features(); }

  /// Aggregated feature rows for already-preprocessed docs.
  SparseMatrix transform(const std::vector<PreprocessedDoc>& docs) const {
    SparseMatrix xw = model_w.transform(docs);
    SparseMatrix xc = model_c.transform(docs);
    return SparseMatrix::horizontal_append(xw, xc);
  }

  /// Feature rows as the classifier expects them (projected when this is a
  /// compressed model).
  SparseMatrix classifier_input(const std::vector<PreprocessedDoc>& docs) const {
    SparseMatrix x = transform(docs);
    if (!lsa.has_value()) return x;
    return dense_to_sparse(lsa_project(*lsa, x));
  }

  std::vector<uint8_t> predict(const std::vector<PreprocessedDoc>& docs) const {
    return classifier.predict(classifier_input(docs));
  }

  std::string to_payload() const {
    std::ostringstream out;
    out << "characteristic " << characteristic_name(characteristic) << '\n';
    out << "config " << config.config_id << '\n';
    out << "char_min " << char_params.min_ngram << '\n';
    out << "char_max " << char_params.max_ngram << '\n';
    out << "has_lsa " << (lsa.has_value() ? 1 : 0) << '\n';
    out << model_w.to_string();
    out << model_c.to_string();
    out << classifier.to_string();
    if (lsa.has_value()) out << lsa->to_string();
    return out.str();
  }

  static CwmModel from_payload(std::string_view payload, std::string_view origin = "<cwm>") {
    auto lines = split(payload, '\n');
    CwmModel m;
    size_t i = 0;
    bool has_lsa = false;
    for (; i < lines.size(); ++i) {
      auto f = split_ws(lines[i]);
      if (f.size() != 2) break;
      if (f[0] == "characteristic") m.characteristic = characteristic_from_name(f[1]);
      else if (f[0] == "config") m.config = nlp_config(std::stoi(f[1]));
      else if (f[0] == "char_min") m.char_params.min_ngram = std::stoi(f[1]);
      else if (f[0] == "char_max") m.char_params.max_ngram = std::stoi(f[1]);
      else if (f[0] == "has_lsa") { has_lsa = f[1] == "1"; ++i; break; }
      else break;
    }
    // Two feature-model blocks follow, then the classifier, then maybe LSA.
    size_t w_len = FeatureModel::block_line_count(lines, i);
    std::string w_block;
    for (size_t j = i; j < i + w_len; ++j) w_block += lines[j] + "\n";
    m.model_w = FeatureModel::parse(w_block, origin);
    i += w_len;
    size_t c_len = FeatureModel::block_line_count(lines, i);
    std::string c_block;
    for (size_t j = i; j < i + c_len; ++j) c_block += lines[j] + "\n";
    m.model_c = FeatureModel::parse(c_block, origin);
    i += c_len;
    m.classifier = TrainedClassifier::parse(lines, i);  // leaves i one past the block
    if (has_lsa) {
      while (i < lines.size() && lines[i].empty()) ++i;
      m.lsa = LsaModel::parse(lines, i);
    }
    return m;
  }

  void save(const std::string& path, const std::string& config_hash, uint64_t seed) const {
    write_artifact(path, lsa.has_value() ? "cwm-lsa" : "cwm", config_hash, seed, to_payload());
  }

  static CwmModel load(const std::string& path) {
    auto art = load_artifact(path);
    if (art.info.kind != "cwm" && art.info.kind != "cwm-lsa") {
      throw DataError(path + ": artifact kind '" + art.info.kind + "' is not a model");
    }
    if (!art.self_check_ok) throw DataError(path + ": artifact failed its self check");
    return from_payload(art.payload, path);
  }
};

struct TrainCwmOptions {
  double min_df_ratio = 0.001;
  double hf_ratio = 0.10;
  CharFilterParams char_params;
  uint64_t seed = 42;
};

/// Build the full aggregated model for one characteristic on the training
/// corpus: word vocabulary from the configuration's n-gram range, character
/// grams from high-frequency tokens, aggregation, then the classifier fit.
inline CwmModel train_cwm(const LabeledCorpus& train, Characteristic vc,
                          const ClassifierSpec& spec, NlpConfig config,
                          const TrainCwmOptions& opt = {}) {
  Vocabulary word_vocab = build_word_vocab(train.docs, config.word_ngram_max, opt.min_df_ratio);
  std::set<std::string> word_terms(word_vocab.terms().begin(), word_vocab.terms().end());
  auto source_words = build_char_source_words(train.docs, opt.hf_ratio);
  auto char_pool =
      build_char_gram_pool(source_words, opt.char_params.min_ngram, opt.char_params.max_ngram);

  auto agg = aggregate(train.docs, word_terms, char_pool, opt.char_params, config);

  std::vector<size_t> idx(train.size());
  for (size_t i = 0; i < train.size(); ++i) idx[i] = i;
  auto y = train.labels_at(idx, vc);

  CwmModel m;
  m.characteristic = vc;
  m.config = config;
  m.char_params = opt.char_params;
  m.model_w = std::move(agg.model_w);
  m.model_c = std::move(agg.model_c);
  m.classifier = fit_classifier(spec, agg.x_agg, y, opt.seed);
  return m;
}

/// Compress an existing model: fit the truncated SVD on the aggregated
/// training matrix and retrain the same classifier spec on the embeddings.
inline CwmModel compress_cwm(const CwmModel& base, const LabeledCorpus& train, size_t rank,
                             uint64_t seed) {
  SparseMatrix x = base.transform(train.docs);
  LsaModel lsa = fit_lsa(x, rank, seed);
  SparseMatrix x_proj = dense_to_sparse(lsa_project(lsa, x));

  std::vector<size_t> idx(train.size());
  for (size_t i = 0; i < train.size(); ++i) idx[i] = i;
  auto y = train.labels_at(idx, base.characteristic);

  CwmModel m = base;
  m.lsa = std::move(lsa);
  m.classifier = fit_classifier(base.classifier.spec, x_proj, y, seed);
  return m;
}

}  // namespace driftva
