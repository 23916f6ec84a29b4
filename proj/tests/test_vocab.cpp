#include <doctest.h>

#include "driftva/vocab.hpp"
#include "support/helpers.hpp"

using namespace driftva;

namespace {

std::multiset<std::string> as_multiset(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("the eight NLP configurations match the grid") {
  struct Row { int id; int n_max; bool tfidf; };
  const Row rows[] = {{1, 1, false}, {2, 1, true},  {3, 2, false}, {4, 3, false},
                      {5, 4, false}, {6, 2, true},  {7, 3, true},  {8, 4, true}};
  for (const auto& r : rows) {
    auto c = nlp_config(r.id);
    CHECK(c.config_id == r.id);
    CHECK(c.word_ngram_max == r.n_max);
    CHECK(c.use_tfidf == r.tfidf);
  }
  CHECK(all_nlp_configs().size() == 8);
  CHECK_THROWS_AS(nlp_config(0), UsageError);
  CHECK_THROWS_AS(nlp_config(9), UsageError);
}

TEST_CASE("word_ngrams enumerates contiguous grams joined by spaces") {
  CHECK(as_multiset(word_ngrams({"hello", "world"}, 2)) ==
        std::multiset<std::string>{"hello", "world", "hello world"});
  CHECK(as_multiset(word_ngrams({"x"}, 4)) == std::multiset<std::string>{"x"});
  CHECK(as_multiset(word_ngrams({"a", "b", "c"}, 3)) ==
        std::multiset<std::string>{"a", "b", "c", "a b", "b c", "a b c"});
  CHECK(word_ngrams({}, 3).empty());
}

TEST_CASE("word_ngrams multiset cardinality identity") {
  Rng rng(5);
  for (int iter = 0; iter < 50; ++iter) {
    const size_t len = rng.next_below(12);
    std::vector<std::string> tokens;
    for (size_t i = 0; i < len; ++i) {
      tokens.push_back(testsup::toy_words()[rng.next_below(testsup::toy_words().size())]);
    }
    const int n_max = 1 + static_cast<int>(rng.next_below(4));
    size_t expected = 0;
    for (int k = 1; k <= n_max; ++k) {
      expected += static_cast<size_t>(std::max<int>(0, static_cast<int>(len) - k + 1));
    }
    CHECK(word_ngrams(tokens, n_max).size() == expected);
  }
}

TEST_CASE("char_ngrams includes spaces as characters") {
  CHECK(as_multiset(char_ngrams("Hello World", 2, 2)) ==
        std::multiset<std::string>{"He", "el", "ll", "lo", "o ", " W", "Wo", "or", "rl", "ld"});
  CHECK(char_ngrams("ab", 3, 3).empty());
  CHECK(as_multiset(char_ngrams("abc", 1, 2)) ==
        std::multiset<std::string>{"a", "b", "c", "ab", "bc"});
}

TEST_CASE("char_ngrams counted cardinality") {
  Rng rng(6);
  for (int iter = 0; iter < 50; ++iter) {
    std::string s;
    const size_t len = rng.next_below(20);
    for (size_t i = 0; i < len; ++i) s += static_cast<char>('a' + rng.next_below(4));
    const int n = 1 + static_cast<int>(rng.next_below(5));
    const size_t expected =
        static_cast<size_t>(std::max<int>(0, static_cast<int>(len) - n + 1));
    CHECK(char_ngrams(s, n, n).size() == expected);
  }
}

TEST_CASE("build_word_vocab applies a strict df threshold") {
  PreprocessedDoc doc;
  doc.tokens = {"buffer", "overflow"};
  std::vector<PreprocessedDoc> docs(3, doc);

  auto vocab = build_word_vocab(docs, 1, 0.0);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.term(0) == "buffer");
  CHECK(vocab.df(0) == 3);
  CHECK(vocab.df(1) == 3);

  // 2000 docs, a term appearing once: 1 > 0.001*2000 = 2 is false -> excluded
  std::vector<PreprocessedDoc> many(2000, doc);
  PreprocessedDoc rare;
  rare.tokens = {"xss", "buffer"};
  many[17] = rare;
  auto vocab2 = build_word_vocab(many, 1, 0.001);
  CHECK(!vocab2.contains("xss"));
  CHECK(vocab2.contains("buffer"));

  CHECK_THROWS_AS(build_word_vocab({}, 1, 0.001), DataError);
  // threshold that excludes everything is fatal with diagnostics
  CHECK_THROWS_AS(build_word_vocab(docs, 1, 2.0), DataError);
}

TEST_CASE("build_char_source_words uses a strict high-frequency threshold") {
  std::vector<PreprocessedDoc> docs(100);
  for (size_t i = 0; i < docs.size(); ++i) {
    docs[i].tokens = {"common"};
    if (i < 11) docs[i].tokens.push_back("eleven");
    if (i < 10) docs[i].tokens.push_back("exactlyten");
  }
  auto words = build_char_source_words(docs, 0.10);
  CHECK(words.count("common") == 1);
  CHECK(words.count("eleven") == 1);      // 11 > 10
  CHECK(words.count("exactlyten") == 0);  // 10 > 10 is false
}

TEST_CASE("fixture corpus source words include the pervasive stems") {
  auto records = testsup::load_fixture_corpus();
  auto stopwords = StopWordList::builtin();
  std::vector<PreprocessedDoc> docs;
  for (const auto& r : records) docs.push_back(preprocess(r.description, stopwords));
  auto words = build_char_source_words(docs, 0.10);
  CHECK(words.count("allow") == 1);
  CHECK(words.count("attack") == 1);
}

TEST_CASE("vocabulary construction is deterministic and serializable") {
  auto records = testsup::load_fixture_corpus();
  auto stopwords = StopWordList::builtin();
  std::vector<PreprocessedDoc> docs;
  for (size_t i = 0; i < records.size(); i += 3) {
    docs.push_back(preprocess(records[i].description, stopwords));
  }
  auto v1 = build_word_vocab(docs, 2, 0.001);
  auto v2 = build_word_vocab(docs, 2, 0.001);
  CHECK(v1.to_string() == v2.to_string());
  CHECK(std::is_sorted(v1.terms().begin(), v1.terms().end()));

  auto parsed = Vocabulary::parse(v1.to_string(), "roundtrip");
  CHECK(parsed.to_string() == v1.to_string());
  CHECK(parsed.n_docs() == docs.size());
}

TEST_CASE("padded char gram pool preserves word-boundary grams") {
  std::set<std::string> source{"attack"};
  auto pool = build_char_gram_pool(source, 2, 6);
  CHECK(pool.count(" a") == 1);   // leading boundary gram
  CHECK(pool.count("k ") == 1);   // trailing boundary gram
  CHECK(pool.count("attack") == 1);
  CHECK(pool.count("at") == 1);
}
