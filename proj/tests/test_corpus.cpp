#include <doctest.h>

#include <filesystem>

#include <zlib.h>

#include "driftva/corpus.hpp"
#include "driftva/nvd.hpp"
#include "support/helpers.hpp"

using namespace driftva;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("driftva_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string gzip_bytes(const std::string& plain) {
  z_stream strm{};
  // 15+16: gzip wrapper
  REQUIRE(deflateInit2(&strm, Z_BEST_SPEED, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) == Z_OK);
  std::string out(plain.size() + 1024, '\0');
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(plain.data()));
  strm.avail_in = static_cast<uInt>(plain.size());
  strm.next_out = reinterpret_cast<Bytef*>(out.data());
  strm.avail_out = static_cast<uInt>(out.size());
  REQUIRE(deflate(&strm, Z_FINISH) == Z_STREAM_END);
  out.resize(out.size() - strm.avail_out);
  deflateEnd(&strm);
  return out;
}

}  // namespace

TEST_CASE("cve id validation and year extraction") {
  CHECK(valid_cve_id("CVE-2016-1000113"));
  CHECK(valid_cve_id("CVE-1999-0001"));
  CHECK(!valid_cve_id("CVE-16-0001"));
  CHECK(!valid_cve_id("CVE-2016-1"));
  CHECK(!valid_cve_id("cve-2016-1000113"));
  CHECK(!valid_cve_id("CVE-2016-10001x3"));
  CHECK(year_from_cve_id("CVE-2016-1000113") == 2016);
}

TEST_CASE("cvss2 vector parsing") {
  auto labels = parse_cvss2_vector("AV:N/AC:L/Au:N/C:P/I:P/A:P", 2);
  REQUIRE(labels.has_value());
  CHECK((*labels)[Characteristic::access_vector] == class_from_name(Characteristic::access_vector, "Network"));
  CHECK((*labels)[Characteristic::access_complexity] == class_from_name(Characteristic::access_complexity, "Low"));
  CHECK((*labels)[Characteristic::authentication] == class_from_name(Characteristic::authentication, "None"));
  CHECK((*labels)[Characteristic::confidentiality] == class_from_name(Characteristic::confidentiality, "Partial"));
  CHECK((*labels)[Characteristic::integrity] == class_from_name(Characteristic::integrity, "Partial"));
  CHECK((*labels)[Characteristic::availability] == class_from_name(Characteristic::availability, "Partial"));
  CHECK((*labels)[Characteristic::severity] == 2);

  CHECK(parse_cvss2_vector("(AV:L/AC:H/Au:M/C:C/I:C/A:C)", 1).has_value());
  CHECK(!parse_cvss2_vector("AV:N/AC:L", 0).has_value());        // incomplete
  CHECK(!parse_cvss2_vector("AV:Q/AC:L/Au:N/C:P/I:P/A:P", 0).has_value());  // bad letter
}

TEST_CASE("severity from base score") {
  CHECK(severity_from_base_score(0.0) == 0);
  CHECK(severity_from_base_score(3.9) == 0);
  CHECK(severity_from_base_score(4.0) == 1);
  CHECK(severity_from_base_score(6.9) == 1);
  CHECK(severity_from_base_score(7.0) == 2);
  CHECK(severity_from_base_score(10.0) == 2);
}

TEST_CASE("filter_corpus removes rejects and unlabeled, idempotently") {
  LabelSet some_labels{};
  std::vector<VulnRecord> records = {
      {"CVE-2017-0001", 2017, "** REJECT **  DO NOT USE THIS CANDIDATE NUMBER.", some_labels},
      {"CVE-2017-0002", 2017, "A clean record without labels.", std::nullopt},
      {"CVE-2017-0003", 2017, "A clean record with labels.", some_labels},
  };
  FilterStats stats;
  auto filtered = filter_corpus(records, &stats);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].cve_id == "CVE-2017-0003");
  CHECK(stats.n_input == 3);
  CHECK(stats.n_reject == 1);
  CHECK(stats.n_no_cvss2 == 1);
  CHECK(stats.n_kept == 1);
  CHECK(stats.n_input - stats.n_reject - stats.n_no_cvss2 == stats.n_kept);

  CHECK(filter_corpus(filtered) == filtered);  // idempotent
  CHECK(filter_corpus({std::vector<VulnRecord>{records[0]}}).empty());
}

TEST_CASE("split_by_year") {
  LabelSet l{};
  std::vector<VulnRecord> records = {
      {"CVE-2015-0001", 2015, "a", l},
      {"CVE-2016-0001", 2016, "b", l},
  };
  auto split = split_by_year(records, 2016);
  REQUIRE(split.train.size() == 1);
  REQUIRE(split.test.size() == 1);
  CHECK(split.train[0].year == 2015);
  CHECK(split.test[0].year == 2016);

  CHECK_THROWS_AS(split_by_year(records, 2010), DataError);  // empty train side
  CHECK_THROWS_AS(split_by_year(records, 2030), DataError);  // empty test side

  // invariants on the fixture corpus
  auto fixture = testsup::load_fixture_corpus();
  auto fx_split = split_by_year(fixture, 2016);
  CHECK(fx_split.train.size() + fx_split.test.size() == fixture.size());
  for (const auto& r : fx_split.train) CHECK(r.year < 2016);
  for (const auto& r : fx_split.test) CHECK(r.year >= 2016);
}

TEST_CASE("corpus TSV round trip") {
  auto fixture = testsup::load_fixture_corpus();
  auto text = corpus_to_string(fixture);
  auto back = corpus_from_string(text, "roundtrip");
  CHECK(back == fixture);
}

TEST_CASE("corpus TSV rejects partial label rows and bad years") {
  CHECK_THROWS_AS(corpus_from_string("CVE-2016-0001\t2016\tdesc\tNone\t-\t-\t-\t-\t-\t-\n"),
                  DataError);
  CHECK_THROWS_AS(corpus_from_string("CVE-1980-0001\t1980\tdesc\t-\t-\t-\t-\t-\t-\t-\n"),
                  DataError);
  CHECK_THROWS_AS(corpus_from_string("BAD-2016-0001\t2016\tdesc\t-\t-\t-\t-\t-\t-\t-\n"),
                  DataError);
}

TEST_CASE("parse_feed: three-entry fixture carries the right flags") {
  auto result = parse_feed(testsup::fixture_path("nvd_feed_small.json"));
  REQUIRE(result.records.size() == 3);
  CHECK(result.n_skipped_no_description == 0);

  const auto& reject = result.records[0];
  CHECK(reject.cve_id == "CVE-2017-0101");
  CHECK(reject.description.find(kRejectMarker) != std::string::npos);
  CHECK(!reject.labels.has_value());

  const auto& no_cvss = result.records[1];
  CHECK(no_cvss.cve_id == "CVE-2017-0102");
  CHECK(!no_cvss.labels.has_value());

  const auto& complete = result.records[2];
  CHECK(complete.cve_id == "CVE-2017-0103");
  CHECK(complete.year == 2017);
  REQUIRE(complete.labels.has_value());
  CHECK((*complete.labels)[Characteristic::access_vector] == 2);       // Network
  CHECK((*complete.labels)[Characteristic::access_complexity] == 0);   // Low
  CHECK((*complete.labels)[Characteristic::authentication] == 0);      // None
  CHECK((*complete.labels)[Characteristic::severity] == 2);            // High
  // English locale chosen over the Spanish one
  CHECK(complete.description.find("Buffer overflow") == 0);

  // after filtering only the complete record survives
  auto filtered = filter_corpus(result.records);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].cve_id == "CVE-2017-0103");
}

TEST_CASE("parse_feed: legacy entries fall back to vectorString, score, cve-id year") {
  auto result = parse_feed(testsup::fixture_path("nvd_feed_legacy.json"));
  REQUIRE(result.records.size() == 2);

  const auto& first = result.records[0];
  REQUIRE(first.labels.has_value());
  CHECK((*first.labels)[Characteristic::access_vector] == 2);
  CHECK((*first.labels)[Characteristic::confidentiality] == 1);
  CHECK((*first.labels)[Characteristic::integrity] == 0);
  CHECK((*first.labels)[Characteristic::severity] == 1);  // 5.0 -> Medium
  CHECK(first.year == 2002);

  const auto& second = result.records[1];
  REQUIRE(second.labels.has_value());
  CHECK(second.year == 2002);  // no publishedDate: falls back to the id year
  CHECK((*second.labels)[Characteristic::authentication] == 2);  // Multiple
  CHECK((*second.labels)[Characteristic::severity] == 1);        // 5.9 -> Medium
}

TEST_CASE("parse_feed: empty feed and malformed input") {
  auto dir = temp_dir("feeds_parse");
  write_file(dir + "/empty.json", R"({"CVE_Items": []})");
  CHECK(parse_feed(dir + "/empty.json").records.empty());

  write_file(dir + "/garbage.json", "{not json");
  CHECK_THROWS_AS(parse_feed(dir + "/garbage.json"), DataError);

  write_file(dir + "/wrong.json", R"({"some": "object"})");
  CHECK_THROWS_AS(parse_feed(dir + "/wrong.json"), DataError);
}

TEST_CASE("gzip round trip through parse_feed") {
  auto dir = temp_dir("feeds_gz");
  std::string plain = read_file(testsup::fixture_path("nvd_feed_small.json"));
  write_file(dir + "/feed.json.gz", gzip_bytes(plain));
  CHECK(looks_gzipped(read_file(dir + "/feed.json.gz")));
  auto result = parse_feed(dir + "/feed.json.gz");
  CHECK(result.records.size() == 3);

  write_file(dir + "/corrupt.json.gz", gzip_bytes(plain).substr(0, 20));
  CHECK_THROWS_AS(parse_feed(dir + "/corrupt.json.gz"), IoError);
}

TEST_CASE("fetch_feeds: warm cache needs no network") {
  auto dir = temp_dir("feeds_cache");
  cache_local_feed(dir, 2017, testsup::fixture_path("nvd_feed_small.json"));

  FetchOptions opt;
  opt.cache_dir = dir;
  opt.offline = true;
  auto files = fetch_feeds(2017, 2017, opt);
  REQUIRE(files.size() == 1);
  CHECK(parse_feed(files[0]).records.size() == 3);

  // idempotent on a warm cache
  CHECK(fetch_feeds(2017, 2017, opt) == files);
}

TEST_CASE("fetch_feeds: out-of-range years are usage errors") {
  FetchOptions opt;
  opt.cache_dir = temp_dir("feeds_range");
  opt.offline = true;
  CHECK_THROWS_AS(fetch_feeds(1987, 1987, opt), UsageError);
  CHECK_THROWS_AS(fetch_feeds(2001, 2001, opt), UsageError);
  CHECK_THROWS_AS(fetch_feeds(2017, 2016, opt), UsageError);
}

TEST_CASE("fetch_feeds: cold cache offline raises a retryable error") {
  FetchOptions opt;
  opt.cache_dir = temp_dir("feeds_cold");
  opt.offline = true;
  try {
    fetch_feeds(2017, 2017, opt);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.retryable());
  }
}

TEST_CASE("fetch_feeds: corrupted cache entry is fatal with the filename") {
  auto dir = temp_dir("feeds_corrupt");
  auto path = cache_local_feed(dir, 2017, testsup::fixture_path("nvd_feed_small.json"));
  write_file(path, "tampered");
  FetchOptions opt;
  opt.cache_dir = dir;
  opt.offline = true;
  try {
    fetch_feeds(2017, 2017, opt);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
    CHECK(!e.retryable());
  }
}

// Live network fetch: opt-in, most environments run air-gapped.
TEST_CASE("fetch_feeds: live download" * doctest::skip(std::getenv("DRIFTVA_NETWORK_TESTS") == nullptr)) {
  FetchOptions opt;
  opt.cache_dir = temp_dir("feeds_live");
  auto files = fetch_feeds(2017, 2018, opt);
  REQUIRE(files.size() == 2);
  for (const auto& f : files) CHECK(parse_feed(f).records.size() > 1000);
}

TEST_CASE("round-trip: every parsed cve id with a description survives serialization") {
  auto result = parse_feed(testsup::fixture_path("nvd_feed_small.json"));
  auto text = corpus_to_string(result.records);
  auto back = corpus_from_string(text, "serialized");
  REQUIRE(back.size() == result.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].cve_id == result.records[i].cve_id);
  }
}
