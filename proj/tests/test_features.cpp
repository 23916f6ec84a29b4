#include <doctest.h>

#include <cmath>

#include "driftva/features.hpp"
#include "support/helpers.hpp"

using namespace driftva;

namespace {

PreprocessedDoc make_doc(std::vector<std::string> tokens) {
  PreprocessedDoc d;
  d.tokens = std::move(tokens);
  return d;
}

}  // namespace

TEST_CASE("filter_char_features drops cross-word grams and single chars") {
  CHECK(filter_char_features({"He", "o ", " W", "x", "ll"}) ==
        std::set<std::string>{"He", "ll"});
  CHECK(filter_char_features({"a b"}).empty());
  CHECK(filter_char_features({"attack"}) == std::set<std::string>{"attack"});
  // the trimmed form is what gets stored
  CHECK(filter_char_features({" at", "ck "}) == std::set<std::string>{"at", "ck"});
}

TEST_CASE("the Hello World trace") {
  // raw 1- and 2-grams of "Hello World" as the sentence-level extraction gives
  auto grams_1 = char_ngrams("Hello World", 1, 1);
  auto grams_2 = char_ngrams("Hello World", 2, 2);
  std::set<std::string> pool(grams_1.begin(), grams_1.end());
  pool.insert(grams_2.begin(), grams_2.end());
  auto selected = filter_char_features(pool);
  CHECK(selected ==
        std::set<std::string>{"He", "el", "ll", "lo", "Wo", "or", "rl", "ld"});
}

TEST_CASE("dedup_words is a set difference") {
  CHECK(dedup_words({"attack", "buffer"}, {"attack", "att"}) == std::set<std::string>{"buffer"});
  CHECK(dedup_words({"alpha", "beta"}, {"gamma"}) == std::set<std::string>{"alpha", "beta"});
  CHECK(dedup_words({"a", "b"}, {"a", "b", "c"}).empty());
}

TEST_CASE("idf formula") {
  NlpConfig tfidf = nlp_config(2);
  // 2 docs, term in both: idf = ln(3/3) + 1 = 1
  auto docs2 = std::vector<PreprocessedDoc>{make_doc({"term"}), make_doc({"term"})};
  auto m = fit_feature_model({"term"}, tfidf, docs2, FeatureKind::word);
  REQUIRE(m.idf().size() == 1);
  CHECK(m.idf()[0] == doctest::Approx(1.0).epsilon(1e-12));

  // term absent from the single fit doc: idf = ln(2/1) + 1
  auto docs1 = std::vector<PreprocessedDoc>{make_doc({"other"})};
  auto m2 = fit_feature_model({"ghost"}, tfidf, docs1, FeatureKind::word);
  CHECK(m2.idf()[0] == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-12));

  // term-frequency config carries no idf
  auto m3 = fit_feature_model({"term"}, nlp_config(1), docs2, FeatureKind::word);
  CHECK(m3.idf().empty());

  CHECK_THROWS_AS(fit_feature_model({}, tfidf, docs2, FeatureKind::word), DataError);
}

TEST_CASE("transform basics") {
  NlpConfig tf = nlp_config(1);
  auto model = fit_feature_model({"alpha", "beta"}, tf, {make_doc({"alpha"})}, FeatureKind::word);

  // a doc with zero vocabulary hits produces an all-zero row
  auto x_zero = model.transform({make_doc({"unknown", "tokens"})});
  CHECK(x_zero.nnz() == 0);
  CHECK(x_zero.n_rows() == 1);
  CHECK(x_zero.n_cols() == 2);

  // exactly one vocab term once -> single entry of 1
  auto x_one = model.transform({make_doc({"alpha"})});
  REQUIRE(x_one.nnz() == 1);
  CHECK(x_one.at(0, 0) == 1.0);

  // tf-idf with equal idf: two-term doc normalizes to 1/sqrt(2) each
  NlpConfig tfidf = nlp_config(2);
  auto docs = std::vector<PreprocessedDoc>{make_doc({"alpha", "beta"})};
  auto mi = fit_feature_model({"alpha", "beta"}, tfidf, docs, FeatureKind::word);
  auto xi = mi.transform(docs);
  REQUIRE(xi.nnz() == 2);
  CHECK(xi.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(xi.at(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("tfidf rows have unit norm") {
  Rng rng(21);
  auto toy = testsup::random_toy_corpus(rng);
  auto docs = testsup::to_docs(toy.docs);
  auto agg = aggregate(docs, toy.word_grams, toy.char_grams, CharFilterParams{2, 4},
                       nlp_config(6));
  for (size_t r = 0; r < agg.x_agg.n_rows(); ++r) {
    // the two blocks normalize independently
    double word_norm = 0.0, char_norm = 0.0;
    for (size_t k = agg.x_agg.row_begin(r); k < agg.x_agg.row_end(r); ++k) {
      const double v = agg.x_agg.value_at(k);
      if (agg.x_agg.col_at(k) < agg.model_w.n_features()) word_norm += v * v;
      else char_norm += v * v;
    }
    if (word_norm > 0) CHECK(std::fabs(std::sqrt(word_norm) - 1.0) < 1e-9);
    if (char_norm > 0) CHECK(std::fabs(std::sqrt(char_norm) - 1.0) < 1e-9);
  }
}

TEST_CASE("aggregate equals the dense brute-force oracle exactly") {
  Rng rng(123);
  for (int iter = 0; iter < 25; ++iter) {
    auto toy = testsup::random_toy_corpus(rng);
    const int config_id = 1 + static_cast<int>(rng.next_below(8));
    NlpConfig config = nlp_config(config_id);
    const int char_min = 2;
    const int char_max = 2 + static_cast<int>(rng.next_below(4));
    CharFilterParams params{char_min, char_max};

    auto docs = testsup::to_docs(toy.docs);
    auto agg = aggregate(docs, toy.word_grams, toy.char_grams, params, config);
    auto oracle = testsup::brute_force_aggregate(toy.docs, toy.word_grams, toy.char_grams,
                                                 char_min, char_max, config.word_ngram_max,
                                                 config.use_tfidf);

    REQUIRE(agg.x_agg.n_rows() == oracle.matrix.size());
    REQUIRE(agg.x_agg.n_cols() == oracle.word_cols.size() + oracle.char_cols.size());
    // column vocabularies agree
    REQUIRE(agg.model_w.vocabulary().terms() == oracle.word_cols);
    REQUIRE(agg.model_c.vocabulary().terms() == oracle.char_cols);

    auto dense = agg.x_agg.to_dense();
    for (size_t r = 0; r < dense.size(); ++r) {
      for (size_t c = 0; c < dense[r].size(); ++c) {
        CAPTURE(iter); CAPTURE(r); CAPTURE(c);
        CHECK(dense[r][c] == oracle.matrix[r][c]);  // bit-exact
      }
    }
  }
}

TEST_CASE("aggregate column structure: word block then char block, disjoint") {
  Rng rng(9);
  auto toy = testsup::random_toy_corpus(rng);
  auto docs = testsup::to_docs(toy.docs);
  auto agg = aggregate(docs, toy.word_grams, toy.char_grams, CharFilterParams{2, 4},
                       nlp_config(1));
  CHECK(agg.x_agg.n_cols() == agg.model_w.n_features() + agg.model_c.n_features());
  // step-8 set difference: no term in both blocks
  for (const auto& t : agg.model_w.vocabulary().terms()) {
    CHECK(!agg.model_c.vocabulary().contains(t));
  }
}

TEST_CASE("aggregate with an empty char pool degrades to the word matrix") {
  auto docs = std::vector<PreprocessedDoc>{make_doc({"alpha", "beta"}), make_doc({"alpha"})};
  auto agg = aggregate(docs, {"alpha", "beta"}, {}, CharFilterParams{2, 6}, nlp_config(1));
  CHECK(agg.model_c.empty_vocabulary());
  CHECK(agg.x_agg.n_cols() == agg.model_w.n_features());
  CHECK(agg.x_agg.at(0, 0) == 1.0);

  CHECK_THROWS_AS(aggregate(docs, {}, {}, CharFilterParams{2, 6}, nlp_config(1)), DataError);
}

TEST_CASE("tf transform is additive over document concatenation") {
  NlpConfig tf = nlp_config(3);
  std::set<std::string> vocab{"alpha", "beta", "alpha beta"};
  auto fit_docs = std::vector<PreprocessedDoc>{make_doc({"alpha", "beta"})};
  auto model = fit_feature_model(vocab, tf, fit_docs, FeatureKind::word);

  Rng rng(31);
  for (int iter = 0; iter < 30; ++iter) {
    std::vector<std::string> a, b;
    for (size_t i = 0; i < rng.next_below(6); ++i) {
      a.push_back(rng.next_below(2) ? "alpha" : "beta");
    }
    for (size_t i = 0; i < rng.next_below(6); ++i) {
      b.push_back(rng.next_below(2) ? "alpha" : "beta");
    }
    std::vector<std::string> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    auto xa = model.count_row(make_doc(a));
    auto xb = model.count_row(make_doc(b));
    auto xab = model.count_row(make_doc(ab));
    // uni-gram columns are additive; cross-boundary bi-grams may add more
    auto idx_alpha = model.vocabulary().find("alpha");
    auto idx_beta = model.vocabulary().find("beta");
    REQUIRE(idx_alpha.has_value());
    REQUIRE(idx_beta.has_value());
    CHECK(xab[*idx_alpha] == xa[*idx_alpha] + xb[*idx_alpha]);
    CHECK(xab[*idx_beta] == xa[*idx_beta] + xb[*idx_beta]);
  }
}

TEST_CASE("legacy min-minus-one flag widens the transform range only") {
  CharFilterParams legacy{2, 6, true};
  CHECK(legacy.effective_min() == 1);
  CharFilterParams normal{2, 6};
  CHECK(normal.effective_min() == 2);

  auto docs = std::vector<PreprocessedDoc>{make_doc({"attack"})};
  auto agg_normal = aggregate(docs, {}, {"at", "ck"}, normal, nlp_config(1));
  auto agg_legacy = aggregate(docs, {}, {"at", "ck"}, legacy, nlp_config(1));
  // length-1 windows never reach the 2+-length vocabulary
  CHECK(agg_normal.x_agg.n_cols() == agg_legacy.x_agg.n_cols());
  CHECK(agg_normal.x_agg.to_dense() == agg_legacy.x_agg.to_dense());
}

TEST_CASE("feature model serialization round trip") {
  Rng rng(17);
  auto toy = testsup::random_toy_corpus(rng);
  auto docs = testsup::to_docs(toy.docs);
  auto agg = aggregate(docs, toy.word_grams, toy.char_grams, CharFilterParams{2, 4},
                       nlp_config(7));

  auto text_w = agg.model_w.to_string();
  auto back_w = FeatureModel::parse(text_w, "roundtrip");
  CHECK(back_w.to_string() == text_w);
  auto text_c = agg.model_c.to_string();
  auto back_c = FeatureModel::parse(text_c, "roundtrip");
  CHECK(back_c.to_string() == text_c);

  // the parsed model transforms identically
  auto x1 = agg.model_c.transform(docs).to_dense();
  auto x2 = back_c.transform(docs).to_dense();
  CHECK(x1 == x2);
}

TEST_CASE("sparse matrix invariants and horizontal_append") {
  SparseBuilder b(2, 3);
  b.add(0, 2, 1.0);
  b.add(0, 0, 2.0);
  b.add(0, 2, 0.5);  // accumulates
  b.add(1, 1, -1.0);
  auto m = std::move(b).build();
  CHECK(m.nnz() == 3);
  CHECK(m.at(0, 2) == 1.5);
  CHECK(m.at(0, 0) == 2.0);
  CHECK(m.at(0, 1) == 0.0);
  // columns sorted per row
  CHECK(m.col_at(m.row_begin(0)) == 0);
  CHECK(m.col_at(m.row_begin(0) + 1) == 2);

  SparseBuilder b2(2, 2);
  b2.add(0, 0, 7.0);
  auto m2 = std::move(b2).build();
  auto h = SparseMatrix::horizontal_append(m, m2);
  CHECK(h.n_cols() == 5);
  CHECK(h.at(0, 3) == 7.0);
  CHECK(h.at(0, 0) == 2.0);
  CHECK(h.at(1, 1) == -1.0);
}
