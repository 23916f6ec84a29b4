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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftva/pipeline.hpp"

namespace fs = std::filesystem;
using namespace driftva;

namespace {

struct GlobalFlags {
  uint64_t seed = 42;
  unsigned jobs = 0;
  bool json = false;
};

// Human-readable tables round to 4 decimals; JSON carries full doubles.
std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

ThreadPool& pool_for(const GlobalFlags& g) {
  static std::optional<ThreadPool> pool;
  if (!pool.has_value()) {
    pool.emplace(g.jobs == 0 ? std::thread::hardware_concurrency() : g.jobs);
  }
  return *pool;
}

std::pair<int, int> parse_year_range(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() == 1) {
    int y = std::stoi(parts[0]);
    return {y, y};
  }
  if (parts.size() != 2) throw UsageError("year range must be FROM:TO, got " + spec);
  return {std::stoi(parts[0]), std::stoi(parts[1])};
}

StopWordList stopwords_from(const std::string& arg) {
  return arg == "builtin" ? StopWordList::builtin() : StopWordList::load(arg);
}

std::vector<std::string> model_files(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".cwm") out.push_back(e.path().string());
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw IoError("no .cwm models in directory: " + path);
    return out;
  }
  if (!file_exists(path)) throw IoError("model not readable: " + path);
  return {path};
}

// --- subcommand bodies ------------------------------------------------------

int cmd_ingest(const GlobalFlags& g, const std::string& years, const std::string& out,
               const std::string& cache, bool offline,
               const std::vector<std::string>& local_feeds) {
  FetchOptions opt;
  opt.cache_dir = cache;
  opt.offline = offline;
  for (const auto& lf : local_feeds) {
    auto eq = lf.find('=');
    if (eq == std::string::npos) throw UsageError("--local-feed expects YEAR=PATH, got " + lf);
    cache_local_feed(cache, std::stoi(lf.substr(0, eq)), lf.substr(eq + 1));
  }
  auto [from, to] = parse_year_range(years);
  auto files = fetch_feeds(from, to, opt);

  std::vector<std::vector<VulnRecord>> parsed(files.size());
  pool_for(g).parallel_for(files.size(), [&](size_t i) {
    parsed[i] = parse_feed(files[i]).records;
  });
  std::vector<VulnRecord> records;
  for (auto& p : parsed) records.insert(records.end(), p.begin(), p.end());

  FilterStats stats;
  auto filtered = filter_corpus(records, &stats);
  std::string payload = "# filter input=" + std::to_string(stats.n_input) +
                        " reject=" + std::to_string(stats.n_reject) +
                        " no_cvss2=" + std::to_string(stats.n_no_cvss2) +
                        " kept=" + std::to_string(stats.n_kept) + "\n" +
                        corpus_to_string(filtered);
  write_file(out, seal_artifact("corpus", hex64(fnv1a64(years + cache)), g.seed, payload));
  if (g.json) {
    std::cout << Json{{"out", out},
                      {"feeds", files.size()},
                      {"input", stats.n_input},
                      {"reject", stats.n_reject},
                      {"no_cvss2", stats.n_no_cvss2},
                      {"kept", stats.n_kept}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "ingested " << stats.n_kept << " records (" << stats.n_input << " parsed, "
              << stats.n_reject << " rejects, " << stats.n_no_cvss2 << " without CVSS-2) -> "
              << out << "\n";
  }
  return 0;
}

int cmd_preprocess(const GlobalFlags& g, const std::string& in, const std::string& out,
                   const std::string& stopwords_arg) {
  auto stopwords = stopwords_from(stopwords_arg);
  std::string content = read_file(in);
  std::string payload = content;
  if (starts_with(content, kArtifactMagic)) payload = open_artifact(content, in).payload;
  auto records = corpus_from_string(payload, in);
  for (auto& r : records) r.description = preprocess(r.description, stopwords).joined();
  write_file(out, seal_artifact("prep", hex64(fnv1a64(in)), g.seed, corpus_to_string(records)));
  if (g.json) {
    std::cout << Json{{"out", out}, {"records", records.size()}}.dump(2) << "\n";
  } else {
    std::cout << "preprocessed " << records.size() << " records -> " << out << "\n";
  }
  return 0;
}

int cmd_select(const GlobalFlags& g, const std::string& in, const std::string& vc_arg, int k,
               const std::string& grid, int split_year, double min_df,
               const std::string& protocol, const std::string& report) {
  RunConfig cfg;
  cfg.grid = grid;
  cfg.vcs = vc_arg;
  cfg.k = k;
  cfg.split_year = split_year;
  cfg.min_df_ratio = min_df;
  cfg.seed = g.seed;

  auto corpus = load_labeled_corpus(in, StopWordList::builtin());
  auto train = slice_years(corpus, 0, split_year - 1);
  EvalOptions opt;
  opt.min_df_ratio = min_df;
  opt.seed = g.seed;

  Json by_vc = Json::object();
  for (auto vc : cfg.selected_vcs()) {
    SelectionResult sel;
    if (protocol == "temporal") {
      sel = select_model(train, k, cfg.grid_kinds(), cfg.grid_configs(), vc, opt, &pool_for(g));
    } else if (protocol == "nontemporal" || protocol == "nontemporal-stratified") {
      // baseline for quantifying how much the year-aware protocol matters
      auto folds = nontemporal_folds(train, k, protocol == "nontemporal-stratified", vc, g.seed);
      sel = select_model_with_folds(train, folds, cfg.grid_kinds(), cfg.grid_configs(), vc, opt,
                                    &pool_for(g));
    } else {
      throw UsageError("unknown protocol: " + protocol);
    }
    by_vc[std::string(characteristic_name(vc))] = selection_json(sel);
    if (!g.json) {
      const auto& best = sel.best();
      std::cout << characteristic_name(vc) << ": " << classifier_name(best.spec.kind) << " ("
                << best.config.config_id << ")  acc=" << fmt4(best.mean.accuracy)
                << " macroF=" << fmt4(best.mean.macro_f)
                << " weightedF=" << fmt4(best.mean.weighted_f) << "\n";
    }
  }
  Json body{{"k", k},           {"split_year", split_year},
            {"min_df_ratio", min_df}, {"grid", grid},
            {"protocol", protocol},   {"characteristics", by_vc}};
  write_file(report, seal_json_artifact("selection", cfg.config_hash(), g.seed, body));
  if (g.json) std::cout << body.dump(2) << "\n";
  return 0;
}

int cmd_featurize(const GlobalFlags& g, const std::string& in, int config_id, int char_min,
                  int char_max, int split_year, double min_df, double hf_ratio,
                  const std::string& model_out) {
  auto corpus = load_labeled_corpus(in, StopWordList::builtin());
  auto train = split_year > 0 ? slice_years(corpus, 0, split_year - 1) : corpus;
  if (train.size() == 0) throw DataError("no records to featurize");
  NlpConfig config = nlp_config(config_id);
  CharFilterParams params{char_min, char_max};
  params.validate();

  Vocabulary vocab = build_word_vocab(train.docs, config.word_ngram_max, min_df);
  std::set<std::string> word_terms(vocab.terms().begin(), vocab.terms().end());
  auto source_words = build_char_source_words(train.docs, hf_ratio);
  auto char_pool = build_char_gram_pool(source_words, params.min_ngram, params.max_ngram);
  auto agg = aggregate(train.docs, word_terms, char_pool, params, config);

  std::ostringstream payload;
  payload << "config " << config.config_id << "\n";
  payload << "char_min " << params.min_ngram << "\n";
  payload << "char_max " << params.max_ngram << "\n";
  payload << agg.model_w.to_string();
  payload << agg.model_c.to_string();
  write_file(model_out, seal_artifact("features", hex64(fnv1a64(in)), g.seed, payload.str()));
  if (g.json) {
    std::cout << Json{{"out", model_out},
                      {"word_features", agg.model_w.n_features()},
                      {"char_features", agg.model_c.n_features()},
                      {"density", agg.x_agg.density()}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "feature models: " << agg.model_w.n_features() << " word + "
              << agg.model_c.n_features() << " char columns (density "
              << agg.x_agg.density() << ") -> " << model_out << "\n";
  }
  return 0;
}

int cmd_train(const GlobalFlags& g, const std::string& in, const std::string& vc_arg,
              const std::string& classifier, int config_id, int split_year, double min_df,
              double hf_ratio, int char_min, int char_max, const std::string& out) {
  auto corpus = load_labeled_corpus(in, StopWordList::builtin());
  auto train = split_year > 0 ? slice_years(corpus, 0, split_year - 1) : corpus;
  Characteristic vc = characteristic_from_name(vc_arg);
  NlpConfig config = nlp_config(config_id);
  ClassifierSpec spec = ClassifierSpec::tuned(classifier_from_name(classifier), config.use_tfidf);

  TrainCwmOptions opt;
  opt.min_df_ratio = min_df;
  opt.hf_ratio = hf_ratio;
  opt.char_params = CharFilterParams{char_min, char_max};
  opt.seed = g.seed;

  CwmModel model = train_cwm(train, vc, spec, config, opt);
  model.save(out, hex64(fnv1a64(in)), g.seed);
  if (g.json) {
    std::cout << Json{{"out", out},
                      {"characteristic", vc_arg},
                      {"classifier", classifier_name(spec.kind)},
                      {"n_features", model.n_features()}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "trained " << classifier_name(spec.kind) << " for " << vc_arg << " on "
              << train.size() << " records, " << model.n_features() << " features -> " << out
              << "\n";
  }
  return 0;
}

int cmd_predict(const GlobalFlags& g, const std::string& model_path,
                const std::string& description, const std::string& stopwords_arg) {
  auto stopwords = stopwords_from(stopwords_arg);
  auto files = model_files(model_path);
  PreprocessedDoc doc = preprocess(description, stopwords);
  std::vector<PreprocessedDoc> docs{doc};

  Json out = Json::object();
  if (doc.tokens.empty()) {
    std::cerr << "warning: description has no informative tokens after preprocessing\n";
  }
  for (const auto& f : files) {
    CwmModel model = CwmModel::load(f);
    SparseMatrix xw = model.model_w.transform(docs);
    if (xw.nnz() == 0) {
      std::cerr << "warning: no known word features for "
                << characteristic_name(model.characteristic) << " model\n";
    }
    SparseMatrix x = model.classifier_input(docs);
    auto pred = model.classifier.predict(x);
    DenseMatrix scores = model.classifier.predict_scores(x);
    Json score_obj = Json::object();
    for (size_t c = 0; c < model.classifier.classes.size(); ++c) {
      score_obj[std::string(class_name(model.characteristic, model.classifier.classes[c]))] =
          scores.at(0, c);
    }
    const std::string vc_name(characteristic_name(model.characteristic));
    out[vc_name] = Json{
        {"predicted", std::string(class_name(model.characteristic, pred[0]))},
        {"scores", score_obj},
        {"word_features_hit", xw.nnz()},
    };
    if (!g.json) {
      std::cout << vc_name << ": " << class_name(model.characteristic, pred[0]) << "  (";
      for (size_t c = 0; c < model.classifier.classes.size(); ++c) {
        std::cout << (c ? ", " : "")
                  << class_name(model.characteristic, model.classifier.classes[c]) << "="
                  << fmt4(scores.at(0, c));
      }
      std::cout << ")\n";
    }
  }
  if (g.json) std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const GlobalFlags& g, const std::string& model_path, const std::string& test_path,
                 const std::string& report) {
  auto files = model_files(model_path);
  auto test = load_labeled_corpus(test_path, StopWordList::builtin());
  if (test.size() == 0) throw DataError("test corpus is empty");

  Json by_vc = Json::object();
  for (const auto& f : files) {
    CwmModel model = CwmModel::load(f);
    SparseMatrix x = model.classifier_input(test.docs);
    std::vector<size_t> idx(test.size());
    for (size_t i = 0; i < test.size(); ++i) idx[i] = i;
    auto y_true = test.labels_at(idx, model.characteristic);
    auto y_pred = model.classifier.predict(x);

    EvalEntry entry;
    entry.vc = model.characteristic;
    entry.classifier = classifier_name(model.classifier.spec.kind);
    entry.config_id = model.config.config_id;
    auto counts = confusion(y_true, y_pred, kClassesPerCharacteristic);
    entry.fscores = f_scores(counts);
    entry.metrics = {accuracy(counts), entry.fscores.macro_f, entry.fscores.weighted_f};
    for (size_t c = 0; c < kClassesPerCharacteristic; ++c) {
      entry.support.push_back(counts.support(c));
    }
    entry.n_features = model.n_features();
    entry.n_test = test.size();
    by_vc[std::string(characteristic_name(model.characteristic))] = eval_entry_json(entry);
    if (!g.json) {
      std::cout << characteristic_name(model.characteristic)
                << ": acc=" << fmt4(entry.metrics.accuracy)
                << " macroF=" << fmt4(entry.metrics.macro_f)
                << " weightedF=" << fmt4(entry.metrics.weighted_f) << "\n";
    }
  }
  Json body{{"characteristics", by_vc}, {"n_test", test.size()}};
  write_file(report, seal_json_artifact("eval", hex64(fnv1a64(model_path)), g.seed, body));
  if (g.json) std::cout << body.dump(2) << "\n";
  return 0;
}

int cmd_analyze_drift(const GlobalFlags& g, const std::string& corpus_path,
                      const std::string& report, const std::string& plot, double min_df,
                      double hf_ratio) {
  auto corpus = load_labeled_corpus(corpus_path, StopWordList::builtin());
  DriftOptions opt;
  opt.min_df_ratio = min_df;
  opt.hf_ratio = hf_ratio;
  DriftReport dr = analyze_drift(corpus, opt);
  Json body = drift_json(dr);
  write_file(report, seal_json_artifact("drift", hex64(fnv1a64(corpus_path)), g.seed, body));
  if (!plot.empty()) write_file(plot, drift_svg(dr.new_terms_by_year));
  if (g.json) {
    std::cout << body.dump(2) << "\n";
  } else {
    std::cout << "new terms across " << dr.new_terms_by_year.size() << " years; "
              << dr.all_zero_cases.size() << " all-zero cases; char coverage "
              << (dr.coverage_ok ? "complete" : "INCOMPLETE") << " over "
              << dr.coverage_checked << " later descriptions -> " << report << "\n";
  }
  return 0;
}

int cmd_reduce(const GlobalFlags& g, const std::string& model_path, const std::string& in,
               int split_year, size_t rank, const std::string& out) {
  CwmModel base = CwmModel::load(model_path);
  auto corpus = load_labeled_corpus(in, StopWordList::builtin());
  auto train = split_year > 0 ? slice_years(corpus, 0, split_year - 1) : corpus;
  CwmModel compressed = compress_cwm(base, train, rank, g.seed);
  compressed.save(out, hex64(fnv1a64(model_path)), g.seed);

  // Rank-selection aid: cumulative captured-variance curve of the fit.
  const auto& ratios = compressed.lsa->explained_variance_ratio;
  std::vector<double> cumulative(ratios.size());
  double running = 0.0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    running += ratios[i];
    cumulative[i] = running;
  }
  if (g.json) {
    std::cout << Json{{"out", out},
                      {"rank", rank},
                      {"original_features", base.n_features()},
                      {"cumulative_variance", cumulative}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "compressed " << base.n_features() << " -> " << rank << " dimensions -> " << out
              << "\n";
    std::cout << "cumulative variance curve (elbow aid):";
    const size_t step = std::max<size_t>(1, cumulative.size() / 10);
    for (size_t i = step - 1; i < cumulative.size(); i += step) {
      std::cout << " " << (i + 1) << ":" << fmt4(cumulative[i]);
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_verify(const GlobalFlags& g, const std::string& path) {
  std::string content = read_file(path);
  ArtifactInfo info;
  bool ok = false;
  if (starts_with(content, kArtifactMagic)) {
    auto art = open_artifact(content, path);
    info = art.info;
    ok = art.self_check_ok;
  } else if (!content.empty() && content[0] == '{') {
    auto art = open_json_artifact(content, path);
    info = art.info;
    ok = art.self_check_ok;
  } else {
    throw DataError(path + ": not a recognized artifact format");
  }
  if (g.json) {
    std::cout << Json{{"path", path},
                      {"kind", info.kind},
                      {"tool", info.tool},
                      {"config_hash", info.config_hash},
                      {"seed", info.seed},
                      {"self_check_ok", ok}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << path << ": kind=" << info.kind << " tool='" << info.tool << "' config_hash="
              << info.config_hash << " seed=" << info.seed << " self-check "
              << (ok ? "OK" : "FAILED") << "\n";
  }
  return ok ? 0 : static_cast<int>(ErrorKind::data);
}

int cmd_run(const GlobalFlags& g, const std::string& config_path, bool seed_set) {
  RunConfig config = RunConfig::load(config_path);
  if (seed_set) config.seed = g.seed;
  auto result = run_pipeline(config, &pool_for(g));
  if (result.exit_code != 0) {
    std::cerr << "pipeline failed: " << result.error << "\n";
    return result.exit_code;
  }
  if (g.json) {
    std::cout << Json{{"out_dir", config.out_dir},
                      {"models", result.model_paths},
                      {"kept_records", result.filter_stats.n_kept}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "pipeline complete: " << result.model_paths.size() << " models under "
              << config.out_dir << "/models\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftva: concept-drift-aware vulnerability assessment pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  bool seed_set = false;
  app.add_option("--seed", g.seed, "master seed recorded in every artifact")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--jobs", g.jobs, "worker threads (0 = logical cores)");
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "fetch/parse NVD feeds into a corpus file")->fallthrough();
  std::string years = "2002:2018", out = "corpus.tsv", cache = "./feeds";
  bool offline = false;
  std::vector<std::string> local_feeds;
  ingest->add_option("--years", years, "feed year range FROM:TO");
  ingest->add_option("--out", out, "output corpus path");
  ingest->add_option("--cache", cache, "feed cache directory");
  ingest->add_flag("--offline", offline, "never touch the network");
  ingest->add_option("--local-feed", local_feeds, "pin local feed file: YEAR=PATH (repeatable)");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "normalize descriptions")->fallthrough();
  std::string p_in = "corpus.tsv", p_out = "prep.tsv", p_stop = "builtin";
  prep->add_option("--in", p_in, "input corpus");
  prep->add_option("--out", p_out, "output prep corpus");
  prep->add_option("--stopwords", p_stop, "stop-word file or 'builtin'");

  // select-model
  auto* sel = app.add_subcommand("select-model", "time-based CV over the candidate grid")->fallthrough();
  std::string s_in = "prep.tsv", s_vc = "all", s_grid = "full", s_report = "selection.json";
  std::string s_protocol = "temporal";
  int s_k = 5, s_split = 2016;
  double s_min_df = 0.001;
  sel->add_option("--in", s_in, "prep corpus");
  sel->add_option("--vc", s_vc, "characteristic name or 'all'");
  sel->add_option("--k", s_k, "folds");
  sel->add_option("--grid", s_grid, "full | fast | kinds:configs");
  sel->add_option("--split-year", s_split, "first testing year");
  sel->add_option("--min-df", s_min_df, "vocabulary document-frequency ratio");
  sel->add_option("--protocol", s_protocol,
                  "temporal | nontemporal | nontemporal-stratified");
  sel->add_option("--report", s_report, "selection report path");

  // featurize
  auto* feat = app.add_subcommand("featurize", "fit word+char feature models")->fallthrough();
  std::string f_in = "prep.tsv", f_out = "cwm.model";
  int f_config = 1, f_cmin = 2, f_cmax = 6, f_split = 0;
  double f_min_df = 0.001, f_hf = 0.10;
  feat->add_option("--in", f_in, "prep corpus");
  feat->add_option("--config", f_config, "NLP configuration 1..8")->check(CLI::Range(1, 8));
  feat->add_option("--char-min", f_cmin, "min char n-gram");
  feat->add_option("--char-max", f_cmax, "max char n-gram");
  feat->add_option("--split-year", f_split, "restrict to years before this (0 = all)");
  feat->add_option("--min-df", f_min_df, "word vocabulary df ratio");
  feat->add_option("--hf", f_hf, "char source high-frequency ratio");
  feat->add_option("--model-out", f_out, "output feature-model artifact");

  // train
  auto* train = app.add_subcommand("train", "train one aggregated model")->fallthrough();
  std::string t_in = "prep.tsv", t_vc = "severity", t_clf = "gbt_leafwise", t_out = "model.cwm";
  int t_config = 1, t_split = 0, t_cmin = 2, t_cmax = 6;
  double t_min_df = 0.001, t_hf = 0.10;
  train->add_option("--in", t_in, "prep corpus");
  train->add_option("--vc", t_vc, "characteristic");
  train->add_option("--classifier", t_clf, "nb|lr|svm|rf|gbt_depthwise|gbt_leafwise|xgb|lgbm");
  train->add_option("--config", t_config, "NLP configuration 1..8")->check(CLI::Range(1, 8));
  train->add_option("--split-year", t_split, "train on years before this (0 = all)");
  train->add_option("--min-df", t_min_df, "word vocabulary df ratio");
  train->add_option("--hf", t_hf, "char source high-frequency ratio");
  train->add_option("--char-min", t_cmin, "min char n-gram");
  train->add_option("--char-max", t_cmax, "max char n-gram");
  train->add_option("--out", t_out, "output model path");

  // predict
  auto* pred = app.add_subcommand("predict", "assess one description")->fallthrough();
  std::string pr_model = "models", pr_desc, pr_stop = "builtin";
  pred->add_option("--model", pr_model, "model file or directory of .cwm files");
  pred->add_option("--description", pr_desc, "vulnerability description text")->required();
  pred->add_option("--stopwords", pr_stop, "stop-word file or 'builtin'");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score models on a test corpus")->fallthrough();
  std::string e_model = "models", e_test = "corpus_test.tsv", e_report = "eval.json";
  eval->add_option("--model", e_model, "model file or directory");
  eval->add_option("--test", e_test, "test corpus");
  eval->add_option("--report", e_report, "evaluation report path");

  // analyze-drift
  auto* drift = app.add_subcommand("analyze-drift", "vocabulary drift analyses")->fallthrough();
  std::string d_corpus = "corpus.tsv", d_report = "drift.json", d_plot;
  double d_min_df = 0.001, d_hf = 0.10;
  drift->add_option("--corpus", d_corpus, "corpus (raw or prep)");
  drift->add_option("--report", d_report, "drift report path");
  drift->add_option("--plot", d_plot, "optional SVG chart path");
  drift->add_option("--min-df", d_min_df, "word vocabulary df ratio");
  drift->add_option("--hf", d_hf, "char source high-frequency ratio");

  // reduce
  auto* reduce = app.add_subcommand("reduce", "compress a model with truncated SVD")->fallthrough();
  std::string r_model = "model.cwm", r_in = "prep.tsv", r_out = "model.lsa300";
  int r_split = 0;
  size_t r_rank = 300;
  reduce->add_option("--model", r_model, "trained .cwm model");
  reduce->add_option("--in", r_in, "prep corpus (training side source)");
  reduce->add_option("--split-year", r_split, "train on years before this (0 = all)");
  reduce->add_option("--rank", r_rank, "embedding dimensions");
  reduce->add_option("--out", r_out, "output compressed model");

  // verify
  auto* verify = app.add_subcommand("verify", "check an artifact's envelope and self hash")->fallthrough();
  std::string v_path;
  verify->add_option("artifact", v_path, "artifact path")->required();

  // run
  auto* run = app.add_subcommand("run", "execute the full pipeline from a config file")->fallthrough();
  std::string run_config;
  run->add_option("--config", run_config, "pipeline config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (ingest->parsed()) return cmd_ingest(g, years, out, cache, offline, local_feeds);
    if (prep->parsed()) return cmd_preprocess(g, p_in, p_out, p_stop);
    if (sel->parsed()) {
      return cmd_select(g, s_in, s_vc, s_k, s_grid, s_split, s_min_df, s_protocol, s_report);
    }
    if (feat->parsed()) {
      return cmd_featurize(g, f_in, f_config, f_cmin, f_cmax, f_split, f_min_df, f_hf, f_out);
    }
    if (train->parsed()) {
      return cmd_train(g, t_in, t_vc, t_clf, t_config, t_split, t_min_df, t_hf, t_cmin, t_cmax,
                       t_out);
    }
    if (pred->parsed()) return cmd_predict(g, pr_model, pr_desc, pr_stop);
    if (eval->parsed()) return cmd_evaluate(g, e_model, e_test, e_report);
    if (drift->parsed()) return cmd_analyze_drift(g, d_corpus, d_report, d_plot, d_min_df, d_hf);
    if (reduce->parsed()) return cmd_reduce(g, r_model, r_in, r_split, r_rank, r_out);
    if (verify->parsed()) return cmd_verify(g, v_path);
    if (run->parsed()) return cmd_run(g, run_config, seed_set);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::internal);
  }
  return 0;
}
