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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <zlib.h>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "driftva/common.hpp"
#include "driftva/corpus.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// gzip
// ---------------------------------------------------------------------------

inline bool looks_gzipped(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

inline std::string gunzip(std::string_view bytes, const std::string& origin) {
  z_stream strm{};
  // 15+32: accept both zlib and gzip wrappers.
  if (inflateInit2(&strm, 15 + 32) != Z_OK) {
    throw InternalError("zlib init failed for " + origin);
  }
  std::string out;
  std::vector<unsigned char> buf(1 << 16);
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  strm.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    strm.next_out = buf.data();
    strm.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw IoError("corrupt gzip stream in " + origin);
    }
    out.append(reinterpret_cast<char*>(buf.data()), buf.size() - strm.avail_out);
  } while (rc != Z_STREAM_END);
  inflateEnd(&strm);
  return out;
}

// ---------------------------------------------------------------------------
// feed parsing (NVD JSON schema 1.0 / 1.1, auto-detected)
// ---------------------------------------------------------------------------

enum class YearSource {
  published_date,  // default: year of the feed's publishedDate field
  cve_id,          // year digits embedded in the CVE identifier
};

struct FeedParseResult {
  std::vector<VulnRecord> records;
  size_t n_skipped_no_description = 0;
  std::string schema_version;  // "1.1", "1.0", or the raw CVE_data_version
};

namespace detail {

inline std::optional<uint8_t> impact_class(const std::string& v) {
  if (v == "NONE") return 0;
  if (v == "PARTIAL") return 1;
  if (v == "COMPLETE") return 2;
  return std::nullopt;
}

inline std::optional<LabelSet> labels_from_impact(const nlohmann::json& impact) {
  if (!impact.contains("baseMetricV2")) return std::nullopt;
  const auto& bm = impact["baseMetricV2"];
  if (!bm.is_object() || !bm.contains("cvssV2")) return std::nullopt;
  const auto& cv = bm["cvssV2"];

  // Severity: qualitative field when present, otherwise derived from score.
  std::optional<uint8_t> severity;
  if (bm.contains("severity") && bm["severity"].is_string()) {
    std::string s = bm["severity"].get<std::string>();
    if (s == "LOW") severity = 0;
    else if (s == "MEDIUM") severity = 1;
    else if (s == "HIGH") severity = 2;
  }
  if (!severity && cv.contains("baseScore") && cv["baseScore"].is_number()) {
    severity = severity_from_base_score(cv["baseScore"].get<double>());
  }
  if (!severity) return std::nullopt;

  // Prefer discrete sub-metric fields; fall back to the vector string.
  auto get_str = [&](const char* key) -> std::optional<std::string> {
    if (cv.contains(key) && cv[key].is_string()) return cv[key].get<std::string>();
    return std::nullopt;
  };
  auto av = get_str("accessVector");
  auto ac = get_str("accessComplexity");
  auto au = get_str("authentication");
  auto ci = get_str("confidentialityImpact");
  auto ii = get_str("integrityImpact");
  auto ai = get_str("availabilityImpact");
  if (av && ac && au && ci && ii && ai) {
    LabelSet labels;
    uint8_t avc = *av == "LOCAL" ? 0 : *av == "ADJACENT_NETWORK" ? 1 : *av == "NETWORK" ? 2 : 255;
    uint8_t acc = *ac == "LOW" ? 0 : *ac == "MEDIUM" ? 1 : *ac == "HIGH" ? 2 : 255;
    uint8_t auc = *au == "NONE" ? 0 : *au == "SINGLE" ? 1 :
                  (*au == "MULTIPLE" || *au == "MULTIPLE_INSTANCES") ? 2 : 255;
    auto cic = impact_class(*ci);
    auto iic = impact_class(*ii);
    auto aic = impact_class(*ai);
    if (avc == 255 || acc == 255 || auc == 255 || !cic || !iic || !aic) return std::nullopt;
    labels[Characteristic::access_vector] = avc;
    labels[Characteristic::access_complexity] = acc;
    labels[Characteristic::authentication] = auc;
    labels[Characteristic::confidentiality] = *cic;
    labels[Characteristic::integrity] = *iic;
    labels[Characteristic::availability] = *aic;
    labels[Characteristic::severity] = *severity;
    return labels;
  }
  if (cv.contains("vectorString") && cv["vectorString"].is_string()) {
    return parse_cvss2_vector(cv["vectorString"].get<std::string>(), *severity);
  }
  return std::nullopt;
}

}  // namespace detail

inline FeedParseResult parse_feed_content(std::string_view content, const std::string& origin,
                                          YearSource year_source = YearSource::published_date) {
  nlohmann::json feed;
  try {
    feed = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed JSON feed " + origin + ": " + e.what());
  }
  if (!feed.is_object() || !feed.contains("CVE_Items") || !feed["CVE_Items"].is_array()) {
    throw DataError("not an NVD JSON feed (missing CVE_Items): " + origin);
  }

  FeedParseResult result;
  result.schema_version =
      feed.value("CVE_data_version", feed.value("CVE_data_format", std::string("unknown")));

  for (const auto& item : feed["CVE_Items"]) {
    if (!item.contains("cve")) continue;
    const auto& cve = item["cve"];
    if (!cve.contains("CVE_data_meta") || !cve["CVE_data_meta"].contains("ID")) continue;
    VulnRecord r;
    r.cve_id = cve["CVE_data_meta"]["ID"].get<std::string>();
    if (!valid_cve_id(r.cve_id)) continue;

    // English description, first locale as fallback.
    std::string desc;
    if (cve.contains("description") && cve["description"].contains("description_data")) {
      const auto& dd = cve["description"]["description_data"];
      for (const auto& d : dd) {
        if (d.value("lang", "") == "en") {
          desc = d.value("value", "");
          break;
        }
      }
      if (desc.empty() && !dd.empty()) desc = dd[0].value("value", "");
    }
    if (desc.empty()) {
      ++result.n_skipped_no_description;
      continue;
    }
    r.description = std::move(desc);

    r.year = 0;
    if (year_source == YearSource::published_date && item.contains("publishedDate") &&
        item["publishedDate"].is_string()) {
      const std::string pd = item["publishedDate"].get<std::string>();
      if (pd.size() >= 4) {
        try {
          r.year = std::stoi(pd.substr(0, 4));
        } catch (...) {
          r.year = 0;
        }
      }
    }
    if (r.year < 1900) r.year = year_from_cve_id(r.cve_id);

    if (item.contains("impact")) r.labels = detail::labels_from_impact(item["impact"]);

    result.records.push_back(std::move(r));
  }
  return result;
}

/// Parse one feed file (gzip or plain JSON).
inline FeedParseResult parse_feed(const std::string& path,
                                  YearSource year_source = YearSource::published_date) {
  std::string bytes = read_file(path);
  if (looks_gzipped(bytes)) bytes = gunzip(bytes, path);
  return parse_feed_content(bytes, path, year_source);
}

// ---------------------------------------------------------------------------
// feed fetching with a content-addressed cache
// ---------------------------------------------------------------------------
//
// cache layout:
//   <cache>/manifest.tsv          year \t filename \t fnv64-of-bytes
//   <cache>/nvdcve-<year>-<hash16>.json.gz
//
// The manifest pins a snapshot per year; warm years never touch the network,
// which also makes experiments reproducible against retroactive NVD edits.

inline constexpr int kFirstFeedYear = 2002;  // NVD publishes yearly feeds from 2002 on
inline constexpr std::string_view kDefaultFeedHost = "nvd.nist.gov";

struct FetchOptions {
  std::string cache_dir;
  bool offline = false;               // never touch the network
  std::string host = std::string(kDefaultFeedHost);
  std::string path_template = "/feeds/json/cve/1.1/nvdcve-1.1-{year}.json.gz";
};

namespace detail {

struct CacheManifest {
  // year -> (filename, hash)
  std::map<int, std::pair<std::string, std::string>> entries;

  static std::string path_in(const std::string& cache_dir) {
    return cache_dir + "/manifest.tsv";
  }

  static CacheManifest load(const std::string& cache_dir) {
    CacheManifest m;
    const std::string p = path_in(cache_dir);
    if (!file_exists(p)) return m;
    for (const auto& line : split(read_file(p), '\n')) {
      if (line.empty() || line[0] == '#') continue;
      auto f = split(line, '\t');
      if (f.size() != 3) continue;
      m.entries[std::stoi(f[0])] = {f[1], f[2]};
    }
    return m;
  }

  void save(const std::string& cache_dir) const {
    std::string out = "# driftva feed cache v1\n";
    for (const auto& [year, e] : entries) {
      out += std::to_string(year) + "\t" + e.first + "\t" + e.second + "\n";
    }
    write_file(path_in(cache_dir), out);
  }
};

inline std::string feed_url_path(const FetchOptions& opt, int year) {
  std::string p = opt.path_template;
  auto pos = p.find("{year}");
  if (pos != std::string::npos) p.replace(pos, 6, std::to_string(year));
  return p;
}

}  // namespace detail

/// Ensure one feed file per year in [year_from, year_to] exists in the cache;
/// returns their paths in year order. Cached years are verified against the
/// manifest hash and never re-downloaded.
inline std::vector<std::string> fetch_feeds(int year_from, int year_to,
                                            const FetchOptions& opt) {
  if (year_from > year_to) throw UsageError("empty year range");
  const int current_year = 2030;  // upper sanity bound; feeds validated on parse anyway
  for (int y = year_from; y <= year_to; ++y) {
    if (y < kFirstFeedYear || y > current_year) {
      throw UsageError("no NVD JSON feed is published for year " + std::to_string(y) +
                       " (yearly feeds start in " + std::to_string(kFirstFeedYear) + ")");
    }
  }
  std::filesystem::create_directories(opt.cache_dir);
  auto manifest = detail::CacheManifest::load(opt.cache_dir);

  std::vector<std::string> paths;
  bool manifest_dirty = false;
  for (int y = year_from; y <= year_to; ++y) {
    auto it = manifest.entries.find(y);
    if (it != manifest.entries.end()) {
      const std::string path = opt.cache_dir + "/" + it->second.first;
      if (!file_exists(path)) {
        throw IoError("cache manifest names a missing file: " + path);
      }
      const std::string bytes = read_file(path);
      if (hex64(fnv1a64(bytes)) != it->second.second) {
        throw IoError("cached feed fails its checksum (corrupt cache): " + path);
      }
      paths.push_back(path);
      continue;
    }
    if (opt.offline) {
      throw IoError("feed for year " + std::to_string(y) +
                        " not in cache and offline mode is set",
                    /*retryable=*/true);
    }
    httplib::SSLClient client(opt.host);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    client.set_follow_location(true);
    auto res = client.Get(detail::feed_url_path(opt, y));
    if (!res || res->status != 200) {
      throw IoError("failed to download feed for year " + std::to_string(y) +
                        (res ? " (HTTP " + std::to_string(res->status) + ")"
                             : " (connection error)"),
                    /*retryable=*/true);
    }
    const std::string& bytes = res->body;
    // Validate before committing to the cache: gunzip + JSON parse.
    std::string json_text = looks_gzipped(bytes) ? gunzip(bytes, "download:" + std::to_string(y))
                                                 : bytes;
    parse_feed_content(json_text, "download:" + std::to_string(y));

    const std::string hash = hex64(fnv1a64(bytes));
    const std::string filename =
        "nvdcve-" + std::to_string(y) + "-" + hash + (looks_gzipped(bytes) ? ".json.gz" : ".json");
    write_file(opt.cache_dir + "/" + filename, bytes);
    manifest.entries[y] = {filename, hash};
    manifest_dirty = true;
    paths.push_back(opt.cache_dir + "/" + filename);
  }
  if (manifest_dirty) manifest.save(opt.cache_dir);
  return paths;
}

/// Register an existing local feed file in the cache for a year (pinning a
/// snapshot obtained out of band).
inline std::string cache_local_feed(const std::string& cache_dir, int year,
                                    const std::string& source_path) {
  std::filesystem::create_directories(cache_dir);
  std::string bytes = read_file(source_path);
  const std::string hash = hex64(fnv1a64(bytes));
  const std::string filename = "nvdcve-" + std::to_string(year) + "-" + hash +
                               (looks_gzipped(bytes) ? ".json.gz" : ".json");
  write_file(cache_dir + "/" + filename, bytes);
  auto manifest = detail::CacheManifest::load(cache_dir);
  manifest.entries[year] = {filename, hash};
  manifest.save(cache_dir);
  return cache_dir + "/" + filename;
}

}  // namespace driftva
