#include <doctest.h>

#include <set>
#include <unordered_set>

#include "driftva/driftlab.hpp"
#include "support/helpers.hpp"

using namespace driftva;

namespace {

LabeledCorpus fixture_corpus() {
  auto records = testsup::load_fixture_corpus();
  return LabeledCorpus::from_records(records, StopWordList::builtin());
}

LabeledCorpus toy_corpus(const std::vector<std::pair<int, std::vector<std::string>>>& entries) {
  LabeledCorpus c;
  int i = 0;
  for (const auto& [year, tokens] : entries) {
    c.cve_ids.push_back("CVE-" + std::to_string(year) + "-" + std::to_string(1000 + i++));
    c.years.push_back(year);
    PreprocessedDoc d;
    d.tokens = tokens;
    c.docs.push_back(d);
    c.labels.push_back(LabelSet{});
  }
  return c;
}

}  // namespace

TEST_CASE("new_terms_per_year counts first appearances only") {
  auto corpus = toy_corpus({
      {2000, {"buffer", "overflow"}},
      {2001, {"buffer", "stuxnet"}},
  });
  auto counts = new_terms_per_year(corpus);
  CHECK(counts[2000] == 2);
  CHECK(counts[2001] == 1);  // only "stuxnet" is new

  auto corpus2 = toy_corpus({
      {2000, {"alpha"}},
      {2001, {"beta"}},
      {2002, {"alpha", "gamma"}},  // alpha already counted for 2000
  });
  auto counts2 = new_terms_per_year(corpus2);
  CHECK(counts2[2000] == 1);
  CHECK(counts2[2001] == 1);
  CHECK(counts2[2002] == 1);
}

TEST_CASE("new-term counts partition the corpus vocabulary") {
  auto corpus = fixture_corpus();
  auto counts = new_terms_per_year(corpus);
  size_t total = 0;
  for (const auto& [year, n] : counts) total += n;
  std::unordered_set<std::string> vocab;
  for (const auto& doc : corpus.docs) vocab.insert(doc.tokens.begin(), doc.tokens.end());
  CHECK(total == vocab.size());

  // order-invariance within a year: shuffle records, counts unchanged
  Rng rng(71);
  LabeledCorpus shuffled = corpus;
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (size_t i = 0; i < order.size(); ++i) {
    shuffled.cve_ids[i] = corpus.cve_ids[order[i]];
    shuffled.years[i] = corpus.years[order[i]];
    shuffled.docs[i] = corpus.docs[order[i]];
    shuffled.labels[i] = corpus.labels[order[i]];
  }
  CHECK(new_terms_per_year(shuffled) == counts);
}

TEST_CASE("find_all_zero_cases flags exactly the planted fixtures") {
  auto corpus = fixture_corpus();
  auto cases = find_all_zero_cases(corpus, 0.001);
  REQUIRE(cases.size() == 3);
  CHECK(cases[0].cve_id == "CVE-2016-1024");
  CHECK(cases[1].cve_id == "CVE-2017-1024");
  CHECK(cases[2].cve_id == "CVE-2018-1024");
  CHECK(cases[0].year == 2016);
  CHECK(cases[1].year == 2017);
  CHECK(cases[2].year == 2018);
  CHECK(std::is_sorted(cases.begin(), cases.end()));
}

TEST_CASE("documents with a known high-df token are never all-zero") {
  auto corpus = toy_corpus({
      {2000, {"allow", "attack"}},
      {2001, {"allow", "newproduct"}},
      {2002, {"brandnewthing", "neverseen"}},  // genuinely all new
  });
  auto cases = find_all_zero_cases(corpus, 0.001);
  REQUIRE(cases.size() == 1);
  CHECK(cases[0].cve_id.substr(0, 8) == "CVE-2002");
}

TEST_CASE("closed vocabulary yields no all-zero cases at ratio zero") {
  auto corpus = toy_corpus({
      {2000, {"alpha", "beta", "gamma"}},
      {2001, {"alpha"}},
      {2002, {"beta", "gamma"}},
  });
  CHECK(find_all_zero_cases(corpus, 0.0).empty());
}

TEST_CASE("char coverage holds on the fixture corpus from the earliest year") {
  auto corpus = fixture_corpus();
  auto result = verify_char_coverage(corpus, 1999, 2, 3);
  CHECK(result.ok);
  CHECK(result.counterexamples.empty());
  CHECK(result.n_checked == 475);  // all records after 1999
  CHECK(result.vocab_size > 10);
}

TEST_CASE("a later doc in a disjoint alphabet breaks coverage and is listed") {
  auto corpus = fixture_corpus();
  corpus.cve_ids.push_back("CVE-2018-9999");
  corpus.years.push_back(2018);
  PreprocessedDoc alien;
  alien.tokens = {"0101010", "1110001"};  // digits never appear in the hf source words
  corpus.docs.push_back(alien);
  corpus.labels.push_back(LabelSet{});
  auto result = verify_char_coverage(corpus, 1999, 2, 3);
  CHECK(!result.ok);
  REQUIRE(result.counterexamples.size() == 1);
  CHECK(result.counterexamples[0] == "CVE-2018-9999");
}

TEST_CASE("coverage is monotone in the maximum gram length") {
  auto corpus = fixture_corpus();
  // if coverage holds at n_max, it holds at every smaller n_max >= n_min
  bool ok6 = verify_char_coverage(corpus, 1999, 2, 6).ok;
  bool ok4 = verify_char_coverage(corpus, 1999, 2, 4).ok;
  bool ok3 = verify_char_coverage(corpus, 1999, 2, 3).ok;
  bool ok2 = verify_char_coverage(corpus, 1999, 2, 2).ok;
  if (ok6) {
    CHECK(ok4);
    CHECK(ok3);
    CHECK(ok2);
  }
  CHECK(ok6);
}

TEST_CASE("compare_models: identical information makes CWM equal WoM") {
  // Two-letter tokens with no shared characters: every character gram trims
  // back to the whole token, so the char vocabulary coincides with the word
  // vocabulary (times a uniform count factor from the padded windows). Tree
  // predictions are invariant to that uniform rescaling, so all three
  // variants see the same information and CWM must score exactly like WoM.
  LabeledCorpus train, test;
  Rng rng(73);
  const std::vector<std::string> class_tokens = {"ab", "cd", "ef"};
  const std::vector<std::string> noise_tokens = {"xy", "zw", "uv"};
  auto add = [&](LabeledCorpus& c, int year, int i) {
    c.cve_ids.push_back("CVE-" + std::to_string(year) + "-" + std::to_string(1000 + i));
    c.years.push_back(year);
    PreprocessedDoc d;
    const uint8_t cls = static_cast<uint8_t>(i % 3);
    d.tokens = {class_tokens[cls], noise_tokens[rng.next_below(3)]};
    c.docs.push_back(d);
    LabelSet l{};
    for (auto vc : kAllCharacteristics) l[vc] = cls;
    c.labels.push_back(l);
  };
  for (int i = 0; i < 30; ++i) add(train, 2010, i);
  for (int i = 0; i < 12; ++i) add(test, 2016, i);

  CompareOptions opt;
  opt.min_df_ratio = 0.0;
  opt.hf_ratio = 0.0;
  opt.wom_split_features = 0;  // same forest settings for every variant
  auto cmp = compare_models(train, test, Characteristic::severity,
                            ClassifierSpec::tuned(ClassifierKind::rf, false), nlp_config(1), opt);
  const auto& cwm = cmp.at("cwm");
  const auto& wom = cmp.at("wom");
  const auto& com = cmp.at("com");
  CHECK(cwm.n_features == wom.n_features);
  CHECK(cwm.metrics.accuracy == wom.metrics.accuracy);
  CHECK(cwm.metrics.macro_f == wom.metrics.macro_f);
  CHECK(cwm.metrics.weighted_f == wom.metrics.weighted_f);
  CHECK(com.metrics.accuracy == wom.metrics.accuracy);
}

TEST_CASE("compare_models on the fixture split reports three variants") {
  auto corpus = fixture_corpus();
  LabeledCorpus train, test;
  for (size_t i = 0; i < corpus.size(); ++i) {
    auto& side = corpus.years[i] < 2016 ? train : test;
    side.cve_ids.push_back(corpus.cve_ids[i]);
    side.years.push_back(corpus.years[i]);
    side.docs.push_back(corpus.docs[i]);
    side.labels.push_back(corpus.labels[i]);
  }
  CompareOptions opt;
  auto cmp = compare_models(train, test, Characteristic::confidentiality,
                            ClassifierSpec::tuned(ClassifierKind::nb, false), nlp_config(1), opt);
  REQUIRE(cmp.variants.size() == 3);
  CHECK(cmp.at("cwm").n_features >
        cmp.at("wom").n_features);  // char block adds columns
  CHECK(cmp.at("cwm").density > cmp.at("wom").density);  // char grams hit often
  for (const auto& v : cmp.variants) {
    CHECK(v.metrics.accuracy >= 0.0);
    CHECK(v.metrics.accuracy <= 1.0);
    CHECK(v.density > 0.0);
    CHECK(v.density <= 1.0);
  }
}

TEST_CASE("analyze_drift assembles the full report on fixtures") {
  auto corpus = fixture_corpus();
  DriftOptions opt;
  auto report = analyze_drift(corpus, opt);
  CHECK(report.new_terms_by_year.size() == 20);
  CHECK(report.all_zero_cases.size() == 3);
  CHECK(report.coverage_ok);
  CHECK(report.density.at("cwm") > report.density.at("wom"));
  CHECK(report.density.at("com") > 0.0);
}
