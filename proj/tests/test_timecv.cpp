#include <doctest.h>

#include <map>
#include <set>

#include "driftva/timecv.hpp"
#include "support/helpers.hpp"

using namespace driftva;

namespace {

LabeledCorpus fixture_corpus() {
  auto records = testsup::load_fixture_corpus();
  return LabeledCorpus::from_records(records, StopWordList::builtin());
}

/// Uniform corpus: identical descriptions, labels rotating per record. Every
/// candidate sees exactly the same features, forcing full metric ties.
LabeledCorpus uninformative_corpus(int year_min, int year_max, int per_year) {
  LabeledCorpus c;
  int counter = 0;
  for (int y = year_min; y <= year_max; ++y) {
    for (int i = 0; i < per_year; ++i) {
      c.cve_ids.push_back("CVE-" + std::to_string(y) + "-" + std::to_string(1000 + i));
      c.years.push_back(y);
      PreprocessedDoc doc;
      doc.tokens = {"constant", "text"};
      c.docs.push_back(doc);
      LabelSet l{};
      for (auto vc : kAllCharacteristics) l[vc] = static_cast<uint8_t>(counter % 3);
      c.labels.push_back(l);
      ++counter;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("make_folds: 1999-2015 with k=5 validates on 2011..2015") {
  std::vector<int> years;
  for (int y = 1999; y <= 2015; ++y) years.push_back(y);
  auto folds = make_folds(years, 5);
  REQUIRE(folds.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(folds[static_cast<size_t>(i)].fold_index == i + 1);
    CHECK(folds[static_cast<size_t>(i)].validate_year == 2011 + i);
    CHECK(folds[static_cast<size_t>(i)].train_year_max == 2010 + i);
    CHECK(folds[static_cast<size_t>(i)].train_year_min == 1999);
  }
}

TEST_CASE("make_folds edge cases") {
  auto single = make_folds(std::vector<int>{2014, 2015}, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].validate_year == 2015);
  CHECK(single[0].train_year_max == 2014);

  CHECK_THROWS_AS(make_folds(std::vector<int>{2014, 2015}, 5), DataError);
  CHECK_THROWS_AS(make_folds(std::vector<int>{2015}, 1), DataError);
}

TEST_CASE("fold indices never leak the validate year into training") {
  auto corpus = fixture_corpus();
  auto train_years = std::vector<int>();
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.years[i] < 2016) train_years.push_back(corpus.years[i]);
  }
  auto folds = make_folds(train_years, 5);
  std::set<int> validate_years;
  for (const auto& fold : folds) {
    validate_years.insert(fold.validate_year);
    auto idx = fold_indices(corpus.years, fold);
    CHECK(!idx.train.empty());
    CHECK(!idx.validate.empty());
    for (size_t i : idx.train) CHECK(corpus.years[i] < fold.validate_year);
    for (size_t i : idx.validate) CHECK(corpus.years[i] == fold.validate_year);
  }
  CHECK(validate_years == std::set<int>{2011, 2012, 2013, 2014, 2015});
}

TEST_CASE("evaluate_candidate: out-of-vocabulary validate terms have no column") {
  // validate-year doc brings a word the training years never saw
  LabeledCorpus corpus;
  auto add = [&](int year, std::vector<std::string> tokens, uint8_t cls) {
    corpus.cve_ids.push_back("CVE-" + std::to_string(year) + "-" +
                             std::to_string(1000 + corpus.size()));
    corpus.years.push_back(year);
    PreprocessedDoc d;
    d.tokens = std::move(tokens);
    corpus.docs.push_back(d);
    LabelSet l{};
    for (auto vc : kAllCharacteristics) l[vc] = cls;
    corpus.labels.push_back(l);
  };
  for (int y = 2000; y <= 2003; ++y) {
    add(y, {"buffer", "overflow"}, 0);
    add(y, {"script", "inject"}, 1);
    add(y, {"crash", "flood"}, 2);
  }
  add(2004, {"zeroday", "buffer"}, 0);  // "zeroday" unseen before 2004
  add(2004, {"script"}, 1);
  add(2004, {"crash"}, 2);

  TimeFold fold;
  fold.fold_index = 1;
  fold.train_year_min = 2000;
  fold.train_year_max = 2003;
  fold.validate_year = 2004;
  auto idx = fold_indices(corpus.years, fold);
  auto feats = build_fold_features(corpus, idx.train, idx.validate, nlp_config(1), 0.0);
  CHECK(!feats.model.vocabulary().contains("zeroday"));
  // the validate row still transforms; the unseen word just contributes nothing
  CHECK(feats.x_validate.n_rows() == 3);
  CHECK(feats.x_validate.at(0, *feats.model.vocabulary().find("buffer")) == 1.0);

  EvalOptions opt;
  opt.min_df_ratio = 0.0;
  auto score = evaluate_candidate(corpus, fold, ClassifierSpec::tuned(ClassifierKind::nb, false),
                                  nlp_config(1), Characteristic::severity, opt);
  CHECK(score.triple.accuracy == 1.0);  // remaining words are fully predictive
  CHECK(!score.degenerate);
}

TEST_CASE("degenerate folds are flagged when a class is absent from training") {
  LabeledCorpus corpus;
  auto add = [&](int year, uint8_t cls, const std::string& word) {
    corpus.cve_ids.push_back("CVE-" + std::to_string(year) + "-" +
                             std::to_string(1000 + corpus.size()));
    corpus.years.push_back(year);
    PreprocessedDoc d;
    d.tokens = {word, "shared"};
    corpus.docs.push_back(d);
    LabelSet l{};
    for (auto vc : kAllCharacteristics) l[vc] = cls;
    corpus.labels.push_back(l);
  };
  for (int y = 2000; y <= 2002; ++y) {
    add(y, 0, "alpha");
    add(y, 1, "beta");
  }
  add(2003, 0, "alpha");
  add(2003, 1, "beta");
  add(2003, 2, "gamma");  // class 2 never appears in training

  TimeFold fold{1, 2000, 2002, 2003};
  EvalOptions opt;
  opt.min_df_ratio = 0.0;
  auto score = evaluate_candidate(corpus, fold, ClassifierSpec::tuned(ClassifierKind::nb, false),
                                  nlp_config(1), Characteristic::severity, opt);
  CHECK(score.degenerate);
  CHECK(score.triple.accuracy < 1.0);  // the unseen class cannot be predicted
}

TEST_CASE("select_model breaks full ties by hyperparameter count") {
  auto corpus = uninformative_corpus(2000, 2006, 6);
  EvalOptions opt;
  opt.min_df_ratio = 0.0;
  // enumeration order puts LR first; the tie must still go to NB (0 hypers)
  auto sel = select_model(corpus, 2, {ClassifierKind::lr, ClassifierKind::nb}, {1},
                          Characteristic::severity, opt);
  CHECK(sel.best().spec.kind == ClassifierKind::nb);
  REQUIRE(sel.candidates.size() == 2);
  CHECK(sel.candidates[0].mean.accuracy == sel.candidates[1].mean.accuracy);
  CHECK(sel.candidates[0].mean.macro_f == sel.candidates[1].mean.macro_f);
  CHECK(sel.candidates[0].mean.weighted_f == sel.candidates[1].mean.weighted_f);
  // uninformative features force a constant prediction; on a balanced
  // 3-class validate year that is exactly one third right
  CHECK(sel.best().mean.accuracy == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("select_model with a single candidate returns it") {
  auto corpus = uninformative_corpus(2000, 2004, 5);
  EvalOptions opt;
  opt.min_df_ratio = 0.0;
  auto sel = select_model(corpus, 2, {ClassifierKind::nb}, {1}, Characteristic::severity, opt);
  CHECK(sel.candidates.size() == 1);
  CHECK(sel.best_index == 0);
  CHECK(sel.best().folds.size() == 2);
}

TEST_CASE("select_model is deterministic and pool-order independent") {
  auto corpus = fixture_corpus();
  auto train = LabeledCorpus();
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.years[i] > 2010) continue;
    train.cve_ids.push_back(corpus.cve_ids[i]);
    train.years.push_back(corpus.years[i]);
    train.docs.push_back(corpus.docs[i]);
    train.labels.push_back(corpus.labels[i]);
  }
  EvalOptions opt;
  ThreadPool pool(4);
  auto a = select_model(train, 3, {ClassifierKind::nb, ClassifierKind::lr}, {1, 2},
                        Characteristic::confidentiality, opt, &pool);
  auto b = select_model(train, 3, {ClassifierKind::nb, ClassifierKind::lr}, {1, 2},
                        Characteristic::confidentiality, opt, nullptr);
  CHECK(a.best_index == b.best_index);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].mean.accuracy == b.candidates[i].mean.accuracy);
    CHECK(a.candidates[i].mean.macro_f == b.candidates[i].mean.macro_f);
    CHECK(a.candidates[i].mean.weighted_f == b.candidates[i].mean.weighted_f);
    CHECK(a.candidates[i].work_units == b.candidates[i].work_units);
  }
}

TEST_CASE("nontemporal folds partition records evenly") {
  auto corpus = uninformative_corpus(2000, 2009, 10);  // 100 records
  auto folds = nontemporal_folds(corpus, 5, false, Characteristic::severity, 7);
  REQUIRE(folds.size() == 5);
  std::set<size_t> seen;
  for (const auto& f : folds) {
    CHECK(f.validate.size() == 20);
    CHECK(f.train.size() == 80);
    for (size_t i : f.validate) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == 100);
  CHECK_THROWS_AS(nontemporal_folds(corpus, 1, false, Characteristic::severity, 7), UsageError);
}

TEST_CASE("stratified folds keep the class mix within one record") {
  // 90/10 two-class mix on the severity label
  LabeledCorpus corpus;
  for (int i = 0; i < 100; ++i) {
    corpus.cve_ids.push_back("CVE-2010-" + std::to_string(1000 + i));
    corpus.years.push_back(2010);
    PreprocessedDoc d;
    d.tokens = {"word"};
    corpus.docs.push_back(d);
    LabelSet l{};
    l[Characteristic::severity] = i < 90 ? 0 : 1;
    corpus.labels.push_back(l);
  }
  auto folds = nontemporal_folds(corpus, 5, true, Characteristic::severity, 11);
  for (const auto& f : folds) {
    size_t majority = 0, minority = 0;
    for (size_t i : f.validate) {
      (corpus.labels[i][Characteristic::severity] == 0 ? majority : minority) += 1;
    }
    CHECK(majority == 18);
    CHECK(minority == 2);
  }
}

TEST_CASE("overfit gap is the signed cv-minus-test difference") {
  CHECK(overfit_gap(0.80, 0.75) == doctest::Approx(0.05));
  CHECK(overfit_gap(0.75, 0.80) == doctest::Approx(-0.05));
}
