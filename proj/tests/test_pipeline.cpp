#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>

#include "driftva/pipeline.hpp"
#include "support/helpers.hpp"

using namespace driftva;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("driftva_pipe_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

RunConfig small_config(const std::string& out_dir) {
  RunConfig c;
  c.corpus = testsup::fixture_path("corpus_fixture.tsv");
  c.out_dir = out_dir;
  c.split_year = 2016;
  c.k = 2;
  c.grid = "nb:1";
  c.seed = 42;
  c.vcs = "severity,access_vector";
  return c;
}

}  // namespace

TEST_CASE("pool jobs propagate exceptions instead of terminating") {
  ThreadPool pool(3);
  std::atomic<size_t> ran{0};
  bool threw = false;
  try {
    pool.parallel_for(20, [&](size_t i) {
      ++ran;
      if (i == 7) throw DataError("boom");
    });
  } catch (const DataError& e) {
    threw = true;
    CHECK(std::string(e.what()) == "boom");
  }
  CHECK(threw);
  CHECK(ran == 20);  // remaining jobs still ran to completion
  // the pool stays usable afterwards
  std::atomic<size_t> again{0};
  pool.parallel_for(10, [&](size_t) { ++again; });
  CHECK(again == 10);
}

TEST_CASE("RunConfig: file parsing, env overrides, grid specs") {
  auto dir = temp_dir("config");
  write_file(dir + "/run.cfg",
             "# comment\n"
             "corpus = " + testsup::fixture_path("corpus_fixture.tsv") + "\n"
             "out_dir = " + dir + "/run\n"
             "k = 3\n"
             "grid = nb,lr:1,2\n"
             "seed = 7\n");
  auto cfg = RunConfig::load(dir + "/run.cfg");
  CHECK(cfg.k == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.grid_kinds() ==
        std::vector<ClassifierKind>{ClassifierKind::nb, ClassifierKind::lr});
  CHECK(cfg.grid_configs() == std::vector<int>{1, 2});

  setenv("DRIFTVA_K", "4", 1);
  auto cfg2 = RunConfig::load(dir + "/run.cfg");
  unsetenv("DRIFTVA_K");
  CHECK(cfg2.k == 4);

  RunConfig full;
  full.grid = "full";
  CHECK(full.grid_kinds().size() == 6);
  CHECK(full.grid_configs().size() == 8);
  RunConfig fast;
  fast.grid = "fast";
  CHECK(fast.grid_kinds().size() == 3);

  RunConfig bad;
  bad.grid = "nonsense";
  CHECK_THROWS_AS(bad.grid_kinds(), UsageError);

  // jobs is excluded from the canonical hash; seed is not
  RunConfig a = small_config("x");
  RunConfig b = small_config("x");
  b.jobs = 16;
  CHECK(a.config_hash() == b.config_hash());
  b.seed = 43;
  CHECK(a.config_hash() != b.config_hash());
}

TEST_CASE("RunConfig validation catches unresolvable paths") {
  RunConfig c;
  CHECK_THROWS_AS(c.validate(), UsageError);  // neither corpus nor feeds
  c.corpus = "/nonexistent/corpus.tsv";
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = small_config(temp_dir("validate"));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("pipeline end to end on a reduced grid") {
  auto out = temp_dir("e2e");
  auto config = small_config(out);
  ThreadPool pool(2);
  auto result = run_pipeline(config, &pool);
  REQUIRE_MESSAGE(result.exit_code == 0, result.error);

  // artifacts exist and self-verify
  for (const auto& name : {"corpus.tsv", "prep.tsv"}) {
    auto art = load_artifact(out + "/" + name);
    CHECK(art.self_check_ok);
    CHECK(art.info.config_hash == config.config_hash());
    CHECK(art.info.seed == 42);
  }
  auto sel = open_json_artifact(read_file(out + "/selection.json"), "selection");
  CHECK(sel.self_check_ok);
  CHECK(sel.info.kind == "selection");
  CHECK(sel.body["characteristics"].contains("severity"));
  // per-fold scores exposed for external statistical testing
  CHECK(sel.body["characteristics"]["severity"]["best"]["folds"].size() == 2);

  auto eval = open_json_artifact(read_file(out + "/eval.json"), "eval");
  CHECK(eval.self_check_ok);
  const auto& sev = eval.body["characteristics"]["severity"];
  CHECK(sev["accuracy"].get<double>() > 0.25);
  CHECK(sev["n_test"].get<size_t>() == 75);

  REQUIRE(result.model_paths.size() == 2);
  for (const auto& p : result.model_paths) {
    auto model = CwmModel::load(p);
    CHECK(model.n_features() > 0);
  }
  CHECK(result.filter_stats.n_input - result.filter_stats.n_reject -
            result.filter_stats.n_no_cvss2 ==
        result.filter_stats.n_kept);
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
  auto out_a = temp_dir("det_a");
  auto out_b = temp_dir("det_b");
  auto cfg_a = small_config(out_a);
  auto cfg_b = small_config(out_b);
  ThreadPool pool(3);
  REQUIRE(run_pipeline(cfg_a, &pool).exit_code == 0);
  REQUIRE(run_pipeline(cfg_b, nullptr).exit_code == 0);

  // out_dir differs, so config hashes differ; compare payload bytes instead
  for (const auto& name : {"prep.tsv"}) {
    CHECK(load_artifact(out_a + "/" + name).payload ==
          load_artifact(out_b + "/" + name).payload);
  }
  for (const auto& vc : {"severity", "access_vector"}) {
    auto pa = load_artifact(out_a + "/models/" + vc + ".cwm").payload;
    auto pb = load_artifact(out_b + "/models/" + vc + ".cwm").payload;
    CHECK(pa == pb);
  }
  auto ja = open_json_artifact(read_file(out_a + "/eval.json"), "a").body;
  auto jb = open_json_artifact(read_file(out_b + "/eval.json"), "b").body;
  ja.erase("artifact");
  jb.erase("artifact");
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("ingest stage can run from a warm feed cache") {
  auto out = temp_dir("ingest_feeds");
  auto cache = temp_dir("ingest_cache");
  cache_local_feed(cache, 2017, testsup::fixture_path("nvd_feed_small.json"));

  RunConfig config;
  config.feeds_cache = cache;
  config.years_from = 2017;
  config.years_to = 2017;
  config.out_dir = out;
  StageContext ctx(config);
  auto stats = stage_ingest(ctx);
  CHECK(stats.n_input == 3);
  CHECK(stats.n_reject == 1);
  CHECK(stats.n_no_cvss2 == 1);
  CHECK(stats.n_kept == 1);

  auto art = load_artifact(out + "/corpus.tsv");
  CHECK(art.self_check_ok);
  auto records = corpus_from_string(art.payload, "ingested");
  REQUIRE(records.size() == 1);
  CHECK(records[0].cve_id == "CVE-2017-0103");

  // a cold year in offline mode surfaces as a retryable I/O failure
  config.years_to = 2018;
  StageContext ctx2(config);
  CHECK_THROWS_AS(stage_ingest(ctx2), IoError);
}

TEST_CASE("a failing stage keeps its predecessors' artifacts for resumption") {
  auto out = temp_dir("resume");
  auto config = small_config(out);
  config.split_year = 2030;  // leaves the test side empty: evaluate must fail
  auto result = run_pipeline(config, nullptr);
  CHECK(result.exit_code == 4);
  // completed stages' artifacts survive; nothing was committed for the failure
  CHECK(file_exists(out + "/corpus.tsv"));
  CHECK(file_exists(out + "/prep.tsv"));
  CHECK(load_artifact(out + "/prep.tsv").self_check_ok);
  CHECK(!file_exists(out + "/eval.json"));

  // a rerun with a fixed split resumes cleanly in the same directory
  config.split_year = 2016;
  CHECK(run_pipeline(config, nullptr).exit_code == 0);
  CHECK(file_exists(out + "/eval.json"));
}

TEST_CASE("missing corpus aborts with the usage exit code and no artifacts") {
  auto out = temp_dir("missing");
  RunConfig config = small_config(out);
  config.corpus = "/nonexistent/corpus.tsv";
  auto result = run_pipeline(config, nullptr);
  CHECK(result.exit_code == 2);
  CHECK(!file_exists(out + "/corpus.tsv"));
  CHECK(!file_exists(out + "/eval.json"));
}

TEST_CASE("artifact tampering is detected") {
  auto out = temp_dir("tamper");
  auto config = small_config(out);
  config.vcs = "severity";
  REQUIRE(run_pipeline(config, nullptr).exit_code == 0);

  auto path = out + "/models/severity.cwm";
  auto content = read_file(path);
  auto pos = content.find("severity");
  content.replace(pos, 8, "Severity");
  write_file(path, content);
  auto art = load_artifact(path);
  CHECK(!art.self_check_ok);
  CHECK_THROWS_AS(CwmModel::load(path), DataError);
}

TEST_CASE("prep artifacts are consumed without re-preprocessing") {
  auto out = temp_dir("prep_reuse");
  auto config = small_config(out);
  config.vcs = "severity";
  REQUIRE(run_pipeline(config, nullptr).exit_code == 0);

  auto corpus = load_labeled_corpus(out + "/prep.tsv", StopWordList::builtin());
  CHECK(corpus.size() == 500);
  // tokens are exactly the stored streams
  auto art = load_artifact(out + "/prep.tsv");
  auto records = filter_corpus(corpus_from_string(art.payload, "prep"));
  for (size_t i = 0; i < 10; ++i) {
    CHECK(corpus.docs[i].tokens == split_ws(records[i].description));
  }
}

TEST_CASE("lsa stage produces a compressed model that still predicts") {
  auto out = temp_dir("lsa");
  auto config = small_config(out);
  config.vcs = "severity";
  config.grid = "lr:1";  // embeddings carry negatives, which NB rejects
  config.lsa_rank = 16;
  auto result = run_pipeline(config, nullptr);
  REQUIRE_MESSAGE(result.exit_code == 0, result.error);
  REQUIRE(result.model_paths.size() == 2);  // .cwm + .lsa16

  auto compressed = CwmModel::load(out + "/models/severity.lsa16");
  REQUIRE(compressed.lsa.has_value());
  CHECK(compressed.lsa->rank == 16);
  PreprocessedDoc doc;
  doc.tokens = {"buffer", "overflow", "allow", "remot", "attack"};
  auto pred = compressed.predict({doc});
  CHECK(pred.size() == 1);
}
