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

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftva/artifact.hpp"
#include "driftva/common.hpp"
#include "driftva/corpus.hpp"
#include "driftva/cwm.hpp"
#include "driftva/driftlab.hpp"
#include "driftva/nvd.hpp"
#include "driftva/report.hpp"
#include "driftva/timecv.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------
//
// Plain `key = value` text, '#' comments. Every key can be overridden by an
// environment variable DRIFTVA_<KEY-IN-UPPERCASE>, so CI can re-point paths
// without editing the file.

struct RunConfig {
  std::string corpus;       // pre-built corpus TSV; alternative to feed ingest
  std::string feeds_cache;  // NVD feed cache directory
  int years_from = 0;
  int years_to = 0;
  std::string out_dir = "run";
  int split_year = 2016;
  int k = 5;
  std::string grid = "fast";  // full | fast | "<kinds>:<configs>" e.g. "nb,lr:1,3"
  int char_min = 2;
  int char_max = 6;
  double min_df_ratio = 0.001;
  double hf_ratio = 0.10;
  uint64_t seed = 42;
  unsigned jobs = 0;  // 0: logical cores
  std::string stopwords = "builtin";
  std::string vcs = "all";
  size_t lsa_rank = 0;  // 0: skip compression

  void set(const std::string& key, const std::string& value) {
    if (key == "corpus") corpus = value;
    else if (key == "feeds_cache") feeds_cache = value;
    else if (key == "years_from") years_from = std::stoi(value);
    else if (key == "years_to") years_to = std::stoi(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "split_year") split_year = std::stoi(value);
    else if (key == "k") k = std::stoi(value);
    else if (key == "grid") grid = value;
    else if (key == "char_min") char_min = std::stoi(value);
    else if (key == "char_max") char_max = std::stoi(value);
    else if (key == "min_df_ratio") min_df_ratio = std::stod(value);
    else if (key == "hf_ratio") hf_ratio = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "jobs") jobs = static_cast<unsigned>(std::stoul(value));
    else if (key == "stopwords") stopwords = value;
    else if (key == "vcs") vcs = value;
    else if (key == "lsa_rank") lsa_rank = std::stoull(value);
    else throw UsageError("unknown config key: " + key);
  }

  static RunConfig load(const std::string& path) {
    if (!file_exists(path)) throw UsageError("config file not readable: " + path);
    RunConfig c;
    for (const auto& raw : split(read_file(path), '\n')) {
      auto line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError(path + ": expected key = value: " + line);
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    c.apply_env_overrides();
    return c;
  }

  void apply_env_overrides() {
    static const char* keys[] = {"corpus",      "feeds_cache",  "years_from", "years_to",
                                 "out_dir",     "split_year",   "k",          "grid",
                                 "char_min",    "char_max",     "min_df_ratio", "hf_ratio",
                                 "seed",        "jobs",         "stopwords",  "vcs",
                                 "lsa_rank"};
    for (const char* key : keys) {
      std::string env_name = "DRIFTVA_" + to_upper(key);
      if (const char* v = std::getenv(env_name.c_str())) set(key, v);
    }
  }

  /// Canonical serialization; its hash stamps every artifact of the run.
  std::string canonical() const {
    std::ostringstream out;
    out << "corpus=" << corpus << "\nfeeds_cache=" << feeds_cache
        << "\nyears_from=" << years_from << "\nyears_to=" << years_to
        << "\nout_dir=" << out_dir << "\nsplit_year=" << split_year << "\nk=" << k
        << "\ngrid=" << grid << "\nchar_min=" << char_min << "\nchar_max=" << char_max
        << "\nmin_df_ratio=" << fmt_double(min_df_ratio) << "\nhf_ratio=" << fmt_double(hf_ratio)
        << "\nseed=" << seed << "\nstopwords=" << stopwords << "\nvcs=" << vcs
        << "\nlsa_rank=" << lsa_rank << "\n";
    // jobs intentionally excluded: worker count must not change results.
    return out.str();
  }

  std::string config_hash() const { return hex64(fnv1a64(canonical())); }

  void validate() const {
    if (corpus.empty() && feeds_cache.empty()) {
      throw UsageError("config needs either 'corpus' or 'feeds_cache' + years");
    }
    if (corpus.empty() && (years_from == 0 || years_to == 0)) {
      throw UsageError("feed ingestion needs years_from and years_to");
    }
    if (!corpus.empty() && !file_exists(corpus)) {
      throw UsageError("corpus path not readable: " + corpus);
    }
    if (stopwords != "builtin" && !file_exists(stopwords)) {
      throw UsageError("stopwords path not readable: " + stopwords);
    }
    if (k < 1) throw UsageError("k must be >= 1");
    CharFilterParams p{char_min, char_max};
    p.validate();
  }

  std::vector<ClassifierKind> grid_kinds() const {
    if (grid == "full") {
      return {ClassifierKind::nb, ClassifierKind::lr,  ClassifierKind::svm,
              ClassifierKind::rf, ClassifierKind::gbt_depthwise, ClassifierKind::gbt_leafwise};
    }
    if (grid == "fast") {
      return {ClassifierKind::nb, ClassifierKind::lr, ClassifierKind::gbt_leafwise};
    }
    auto colon = grid.find(':');
    if (colon == std::string::npos) throw UsageError("bad grid spec: " + grid);
    std::vector<ClassifierKind> kinds;
    for (const auto& name : split(grid.substr(0, colon), ',')) {
      kinds.push_back(classifier_from_name(trim(name)));
    }
    if (kinds.empty()) throw UsageError("grid names no classifiers: " + grid);
    return kinds;
  }

  std::vector<int> grid_configs() const {
    if (grid == "full") return {1, 2, 3, 4, 5, 6, 7, 8};
    if (grid == "fast") return {1, 2};
    auto colon = grid.find(':');
    std::vector<int> ids;
    for (const auto& num : split(grid.substr(colon + 1), ',')) {
      ids.push_back(std::stoi(trim(num)));
    }
    if (ids.empty()) throw UsageError("grid names no configurations: " + grid);
    for (int id : ids) nlp_config(id);  // validates range
    return ids;
  }

  std::vector<Characteristic> selected_vcs() const {
    if (vcs == "all") {
      return std::vector<Characteristic>(kAllCharacteristics.begin(), kAllCharacteristics.end());
    }
    std::vector<Characteristic> out;
    for (const auto& name : split(vcs, ',')) out.push_back(characteristic_from_name(trim(name)));
    return out;
  }

  StopWordList load_stopwords() const {
    return stopwords == "builtin" ? StopWordList::builtin() : StopWordList::load(stopwords);
  }

  CharFilterParams char_params() const { return CharFilterParams{char_min, char_max}; }

 private:
  static std::string to_upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }
};

// ---------------------------------------------------------------------------
// artifact paths and corpus loading
// ---------------------------------------------------------------------------

struct RunPaths {
  std::string corpus_tsv;
  std::string prep_tsv;
  std::string selection_json;
  std::string eval_json;
  std::string models_dir;

  static RunPaths in(const std::string& out_dir) {
    return {out_dir + "/corpus.tsv", out_dir + "/prep.tsv", out_dir + "/selection.json",
            out_dir + "/eval.json", out_dir + "/models"};
  }
};

/// Write an artifact through a .partial file; the final name only appears on
/// success, failed stages leave their partial output behind for inspection.
inline void commit_artifact(const std::string& path, std::string_view content) {
  const std::string partial = path + ".partial";
  write_file(partial, content);
  std::filesystem::rename(partial, path);
}

inline LabeledCorpus labeled_from_preprocessed(const std::vector<VulnRecord>& records) {
  LabeledCorpus c;
  for (const auto& r : records) {
    if (!r.labels.has_value()) continue;
    c.cve_ids.push_back(r.cve_id);
    c.years.push_back(r.year);
    PreprocessedDoc doc;
    doc.tokens = split_ws(r.description);
    c.docs.push_back(std::move(doc));
    c.labels.push_back(*r.labels);
  }
  return c;
}

/// Read a corpus or prep TSV (sealed or plain). Prep files hold already
/// preprocessed token streams which must not be run through the text pipeline
/// again (stemming is not idempotent on every word).
inline LabeledCorpus load_labeled_corpus(const std::string& path, const StopWordList& stopwords) {
  std::string content = read_file(path);
  bool is_prep = false;
  std::string payload = content;
  if (starts_with(content, kArtifactMagic)) {
    auto art = open_artifact(content, path);
    if (!art.self_check_ok) throw DataError(path + ": artifact failed its self check");
    is_prep = art.info.kind == "prep";
    payload = art.payload;
  }
  auto records = filter_corpus(corpus_from_string(payload, path));
  if (is_prep) return labeled_from_preprocessed(records);
  return LabeledCorpus::from_records(records, stopwords);
}

inline LabeledCorpus slice_years(const LabeledCorpus& c, int min_year, int max_year) {
  LabeledCorpus out;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c.years[i] < min_year || c.years[i] > max_year) continue;
    out.cve_ids.push_back(c.cve_ids[i]);
    out.years.push_back(c.years[i]);
    out.docs.push_back(c.docs[i]);
    out.labels.push_back(c.labels[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// pipeline stages
// ---------------------------------------------------------------------------

struct StageContext {
  RunConfig config;
  RunPaths paths;
  ThreadPool* pool = nullptr;
  std::string hash;

  explicit StageContext(RunConfig cfg, ThreadPool* p = nullptr)
      : config(std::move(cfg)), paths(RunPaths::in(config.out_dir)), pool(p),
        hash(config.config_hash()) {
    std::filesystem::create_directories(config.out_dir);
    std::filesystem::create_directories(paths.models_dir);
  }
};

/// ingest: bring the raw corpus into the run directory as a sealed, filtered
/// corpus artifact. Source is either a pre-built TSV or the NVD feed cache.
inline FilterStats stage_ingest(const StageContext& ctx) {
  std::vector<VulnRecord> records;
  if (!ctx.config.corpus.empty()) {
    std::string content = read_file(ctx.config.corpus);
    std::string payload = content;
    if (starts_with(content, kArtifactMagic)) {
      payload = open_artifact(content, ctx.config.corpus).payload;
    }
    records = corpus_from_string(payload, ctx.config.corpus);
  } else {
    FetchOptions opt;
    opt.cache_dir = ctx.config.feeds_cache;
    opt.offline = true;  // run_pipeline never hits the network; use `driftva ingest` to warm
    auto files = fetch_feeds(ctx.config.years_from, ctx.config.years_to, opt);
    for (const auto& f : files) {
      auto parsed = parse_feed(f);
      records.insert(records.end(), parsed.records.begin(), parsed.records.end());
    }
  }
  FilterStats stats;
  auto filtered = filter_corpus(records, &stats);
  std::string payload = "# filter input=" + std::to_string(stats.n_input) +
                        " reject=" + std::to_string(stats.n_reject) +
                        " no_cvss2=" + std::to_string(stats.n_no_cvss2) +
                        " kept=" + std::to_string(stats.n_kept) + "\n" +
                        corpus_to_string(filtered);
  commit_artifact(ctx.paths.corpus_tsv,
                  seal_artifact("corpus", ctx.hash, ctx.config.seed, payload));
  return stats;
}

/// preprocess: normalize every description; the prep artifact stores joined
/// token streams in the same TSV layout.
inline void stage_preprocess(const StageContext& ctx) {
  auto stopwords = ctx.config.load_stopwords();
  auto records = corpus_from_string(open_artifact(read_file(ctx.paths.corpus_tsv),
                                                  ctx.paths.corpus_tsv)
                                        .payload,
                                    ctx.paths.corpus_tsv);
  for (auto& r : records) {
    r.description = preprocess(r.description, stopwords).joined();
  }
  commit_artifact(ctx.paths.prep_tsv,
                  seal_artifact("prep", ctx.hash, ctx.config.seed, corpus_to_string(records)));
}

/// select-model: run the candidate grid with time-based CV on the training
/// side, one selection per characteristic. Fold feature matrices are shared
/// across characteristics and classifier kinds.
inline Json stage_select(const StageContext& ctx) {
  auto stopwords = ctx.config.load_stopwords();
  auto all = load_labeled_corpus(ctx.paths.prep_tsv, stopwords);
  auto train = slice_years(all, 0, ctx.config.split_year - 1);
  if (train.size() == 0) throw DataError("no training records before split year");

  const auto kinds = ctx.config.grid_kinds();
  const auto config_ids = ctx.config.grid_configs();
  const auto vcs = ctx.config.selected_vcs();

  auto time_folds = make_folds(train.years, ctx.config.k);
  std::vector<FoldIndices> folds;
  for (const auto& f : time_folds) folds.push_back(fold_indices(train.years, f));

  EvalOptions opt;
  opt.min_df_ratio = ctx.config.min_df_ratio;
  opt.seed = ctx.config.seed;

  // Share each (fold, config) feature build across every characteristic.
  const size_t n_cells = folds.size() * config_ids.size();
  std::vector<std::vector<std::vector<FoldScore>>> scores(
      vcs.size(), std::vector<std::vector<FoldScore>>(kinds.size() * config_ids.size(),
                                                      std::vector<FoldScore>(folds.size())));
  std::vector<std::vector<std::vector<uint64_t>>> work(
      vcs.size(), std::vector<std::vector<uint64_t>>(kinds.size() * config_ids.size(),
                                                     std::vector<uint64_t>(folds.size(), 0)));

  auto run_cell = [&](size_t job) {
    const size_t fi = job / config_ids.size();
    const size_t ci = job % config_ids.size();
    const NlpConfig config = nlp_config(config_ids[ci]);
    auto feats = build_fold_features(train, folds[fi].train, folds[fi].validate, config,
                                     opt.min_df_ratio);
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
      const ClassifierSpec spec = ClassifierSpec::tuned(kinds[ki], config.use_tfidf);
      for (size_t vi = 0; vi < vcs.size(); ++vi) {
        const size_t cand = ki * config_ids.size() + ci;
        scores[vi][cand][fi] =
            score_on_validate(feats, train, folds[fi].train, folds[fi].validate, spec, vcs[vi],
                              opt.seed, &work[vi][cand][fi]);
      }
    }
  };
  if (ctx.pool) ctx.pool->parallel_for(n_cells, run_cell);
  else for (size_t j = 0; j < n_cells; ++j) run_cell(j);

  Json by_vc = Json::object();
  for (size_t vi = 0; vi < vcs.size(); ++vi) {
    SelectionResult sel;
    sel.characteristic = vcs[vi];
    sel.k = ctx.config.k;
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
      for (size_t ci = 0; ci < config_ids.size(); ++ci) {
        CandidateResult cand;
        cand.config = nlp_config(config_ids[ci]);
        cand.spec = ClassifierSpec::tuned(kinds[ki], cand.config.use_tfidf);
        cand.folds = scores[vi][ki * config_ids.size() + ci];
        cand.mean = detail::mean_of(cand.folds);
        for (uint64_t w : work[vi][ki * config_ids.size() + ci]) cand.work_units += w;
        sel.candidates.push_back(std::move(cand));
      }
    }
    sel.best_index = 0;
    for (size_t i = 1; i < sel.candidates.size(); ++i) {
      if (detail::candidate_better(sel.candidates[i], i, sel.candidates[sel.best_index],
                                   sel.best_index)) {
        sel.best_index = i;
      }
    }
    by_vc[std::string(characteristic_name(vcs[vi]))] = selection_json(sel);
  }

  Json body{{"k", ctx.config.k},
            {"split_year", ctx.config.split_year},
            {"min_df_ratio", ctx.config.min_df_ratio},
            {"grid", ctx.config.grid},
            {"characteristics", by_vc}};
  commit_artifact(ctx.paths.selection_json,
                  seal_json_artifact("selection", ctx.hash, ctx.config.seed, body));
  return body;
}

inline std::pair<ClassifierSpec, NlpConfig> best_from_selection(const Json& selection,
                                                                Characteristic vc) {
  const std::string name(characteristic_name(vc));
  if (!selection.contains("characteristics") || !selection["characteristics"].contains(name)) {
    throw DataError("selection report has no entry for " + name);
  }
  const auto& best = selection["characteristics"][name]["best"];
  ClassifierSpec spec;
  spec.kind = classifier_from_name(best["classifier"].get<std::string>());
  for (const auto& [k, v] : best["hyper"].items()) spec.hyper[k] = v.get<double>();
  return {spec, nlp_config(best["config"].get<int>())};
}

/// train: one aggregated model per characteristic, using the selection's
/// optimal classifier and configuration.
inline std::vector<std::string> stage_train(const StageContext& ctx, const Json& selection) {
  auto stopwords = ctx.config.load_stopwords();
  auto all = load_labeled_corpus(ctx.paths.prep_tsv, stopwords);
  auto train = slice_years(all, 0, ctx.config.split_year - 1);

  TrainCwmOptions opt;
  opt.min_df_ratio = ctx.config.min_df_ratio;
  opt.hf_ratio = ctx.config.hf_ratio;
  opt.char_params = ctx.config.char_params();
  opt.seed = ctx.config.seed;

  std::vector<std::string> model_paths;
  for (auto vc : ctx.config.selected_vcs()) {
    auto [spec, config] = best_from_selection(selection, vc);
    CwmModel model = train_cwm(train, vc, spec, config, opt);
    const std::string path =
        ctx.paths.models_dir + "/" + std::string(characteristic_name(vc)) + ".cwm";
    const std::string partial = path + ".partial";
    write_file(partial, seal_artifact("cwm", ctx.hash, ctx.config.seed, model.to_payload()));
    std::filesystem::rename(partial, path);
    model_paths.push_back(path);
  }
  return model_paths;
}

/// evaluate: score every trained model on the held-out years.
inline Json stage_evaluate(const StageContext& ctx) {
  auto stopwords = ctx.config.load_stopwords();
  auto all = load_labeled_corpus(ctx.paths.prep_tsv, stopwords);
  auto test = slice_years(all, ctx.config.split_year, 9999);
  if (test.size() == 0) throw DataError("no testing records at or after split year");

  Json by_vc = Json::object();
  for (auto vc : ctx.config.selected_vcs()) {
    const std::string path =
        ctx.paths.models_dir + "/" + std::string(characteristic_name(vc)) + ".cwm";
    CwmModel model = CwmModel::load(path);
    SparseMatrix x = model.classifier_input(test.docs);
    std::vector<size_t> idx(test.size());
    for (size_t i = 0; i < test.size(); ++i) idx[i] = i;
    auto y_true = test.labels_at(idx, vc);
    auto y_pred = model.classifier.predict(x);

    EvalEntry entry;
    entry.vc = vc;
    entry.classifier = classifier_name(model.classifier.spec.kind);
    entry.config_id = model.config.config_id;
    auto counts = confusion(y_true, y_pred, kClassesPerCharacteristic);
    entry.metrics = {accuracy(counts), 0.0, 0.0};
    entry.fscores = f_scores(counts);
    entry.metrics.macro_f = entry.fscores.macro_f;
    entry.metrics.weighted_f = entry.fscores.weighted_f;
    for (size_t c = 0; c < kClassesPerCharacteristic; ++c) {
      entry.support.push_back(counts.support(c));
    }
    entry.n_features = model.n_features();
    entry.n_test = test.size();
    by_vc[std::string(characteristic_name(vc))] = eval_entry_json(entry);
  }
  Json body{{"split_year", ctx.config.split_year}, {"characteristics", by_vc}};
  commit_artifact(ctx.paths.eval_json,
                  seal_json_artifact("eval", ctx.hash, ctx.config.seed, body));
  return body;
}

/// reduce: optional low-rank compression of every trained model.
inline std::vector<std::string> stage_reduce(const StageContext& ctx) {
  if (ctx.config.lsa_rank == 0) return {};
  auto stopwords = ctx.config.load_stopwords();
  auto all = load_labeled_corpus(ctx.paths.prep_tsv, stopwords);
  auto train = slice_years(all, 0, ctx.config.split_year - 1);

  std::vector<std::string> paths;
  for (auto vc : ctx.config.selected_vcs()) {
    const std::string base_path =
        ctx.paths.models_dir + "/" + std::string(characteristic_name(vc)) + ".cwm";
    CwmModel base = CwmModel::load(base_path);
    CwmModel compressed = compress_cwm(base, train, ctx.config.lsa_rank, ctx.config.seed);
    const std::string path = ctx.paths.models_dir + "/" +
                             std::string(characteristic_name(vc)) + ".lsa" +
                             std::to_string(ctx.config.lsa_rank);
    const std::string partial = path + ".partial";
    write_file(partial,
               seal_artifact("cwm-lsa", ctx.hash, ctx.config.seed, compressed.to_payload()));
    std::filesystem::rename(partial, path);
    paths.push_back(path);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// full pipeline
// ---------------------------------------------------------------------------

struct PipelineResult {
  int exit_code = 0;
  std::string error;
  FilterStats filter_stats;
  std::vector<std::string> model_paths;
};

/// ingest -> preprocess -> select-model -> train -> evaluate (-> reduce).
/// Every stage reads its predecessor's on-disk artifact, so a failed run can
/// resume from the last good stage.
inline PipelineResult run_pipeline(const RunConfig& config, ThreadPool* pool = nullptr) {
  PipelineResult result;
  try {
    config.validate();
    StageContext ctx(config, pool);
    result.filter_stats = stage_ingest(ctx);
    stage_preprocess(ctx);
    Json selection = stage_select(ctx);
    result.model_paths = stage_train(ctx, selection);
    stage_evaluate(ctx);
    auto lsa_paths = stage_reduce(ctx);
    result.model_paths.insert(result.model_paths.end(), lsa_paths.begin(), lsa_paths.end());
  } catch (const Error& e) {
    result.exit_code = e.exit_code();
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = static_cast<int>(ErrorKind::internal);
    result.error = e.what();
  }
  return result;
}

}  // namespace driftva
