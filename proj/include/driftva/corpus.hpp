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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftva/common.hpp"
#include "driftva/util.hpp"

namespace driftva {

// ---------------------------------------------------------------------------
// label model: seven CVSS-2 base characteristics, three classes each
// ---------------------------------------------------------------------------

enum class Characteristic : uint8_t {
  confidentiality = 0,
  integrity,
  availability,
  access_vector,
  access_complexity,
  authentication,
  severity,
};

inline constexpr size_t kNumCharacteristics = 7;
inline constexpr size_t kClassesPerCharacteristic = 3;

inline constexpr std::array<Characteristic, kNumCharacteristics> kAllCharacteristics = {
    Characteristic::confidentiality, Characteristic::integrity,
    Characteristic::availability,    Characteristic::access_vector,
    Characteristic::access_complexity, Characteristic::authentication,
    Characteristic::severity,
};

inline constexpr std::array<std::string_view, kNumCharacteristics> kCharacteristicNames = {
    "confidentiality", "integrity",         "availability",  "access_vector",
    "access_complexity", "authentication",  "severity",
};

/// Class names per characteristic; the index order here is the canonical
/// class order used for deterministic tie-breaking everywhere.
inline constexpr std::array<std::array<std::string_view, 3>, kNumCharacteristics>
    kClassNames = {{
        {"None", "Partial", "Complete"},          // confidentiality
        {"None", "Partial", "Complete"},          // integrity
        {"None", "Partial", "Complete"},          // availability
        {"Local", "AdjacentNetwork", "Network"},  // access vector
        {"Low", "Medium", "High"},                // access complexity
        {"None", "Single", "Multiple"},           // authentication
        {"Low", "Medium", "High"},                // severity
    }};

inline std::string_view characteristic_name(Characteristic c) {
  return kCharacteristicNames[static_cast<size_t>(c)];
}

inline Characteristic characteristic_from_name(std::string_view name) {
  std::string lower = to_lower(name);
  for (size_t i = 0; i < kNumCharacteristics; ++i) {
    if (lower == kCharacteristicNames[i]) return kAllCharacteristics[i];
  }
  throw UsageError("unknown vulnerability characteristic: " + std::string(name));
}

inline std::string_view class_name(Characteristic c, uint8_t cls) {
  return kClassNames[static_cast<size_t>(c)][cls];
}

inline uint8_t class_from_name(Characteristic c, std::string_view name) {
  const auto& names = kClassNames[static_cast<size_t>(c)];
  for (uint8_t i = 0; i < kClassesPerCharacteristic; ++i) {
    if (names[i] == name) return i;
  }
  throw DataError("unknown class '" + std::string(name) + "' for " +
                  std::string(characteristic_name(c)));
}

/// Class index per characteristic, dense (all seven present or none at all:
/// a record with any missing sub-metric is treated as unlabeled).
struct LabelSet {
  std::array<uint8_t, kNumCharacteristics> cls{};

  uint8_t operator[](Characteristic c) const { return cls[static_cast<size_t>(c)]; }
  uint8_t& operator[](Characteristic c) { return cls[static_cast<size_t>(c)]; }
  bool operator==(const LabelSet&) const = default;
};

// ---------------------------------------------------------------------------
// records
// ---------------------------------------------------------------------------

struct VulnRecord {
  std::string cve_id;
  int year = 0;
  std::string description;
  std::optional<LabelSet> labels;

  bool operator==(const VulnRecord&) const = default;
};

inline bool valid_cve_id(std::string_view id) {
  if (!starts_with(id, "CVE-")) return false;
  if (id.size() < 4 + 4 + 1 + 4) return false;
  for (size_t i = 4; i < 8; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  if (id[8] != '-') return false;
  if (id.size() < 13) return false;  // at least four trailing digits
  for (size_t i = 9; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  return true;
}

inline int year_from_cve_id(std::string_view id) {
  if (!valid_cve_id(id)) throw DataError("malformed CVE id: " + std::string(id));
  return std::stoi(std::string(id.substr(4, 4)));
}

// ---------------------------------------------------------------------------
// CVSS-2 vector strings, e.g. "AV:N/AC:L/Au:N/C:P/I:P/A:P"
// ---------------------------------------------------------------------------

inline std::optional<LabelSet> parse_cvss2_vector(std::string_view vec, uint8_t severity_cls) {
  std::string v(vec);
  // Some feeds wrap the vector in parentheses.
  if (!v.empty() && v.front() == '(') v = v.substr(1);
  if (!v.empty() && v.back() == ')') v.pop_back();

  LabelSet labels;
  std::array<bool, 6> seen{};
  for (const auto& part : split(v, '/')) {
    auto kv = split(part, ':');
    if (kv.size() != 2) return std::nullopt;
    const std::string& key = kv[0];
    const std::string& val = kv[1];
    if (val.size() != 1) return std::nullopt;
    char c = val[0];
    auto impact = [&](char ch) -> std::optional<uint8_t> {
      switch (ch) {
        case 'N': return 0;
        case 'P': return 1;
        case 'C': return 2;
        default: return std::nullopt;
      }
    };
    if (key == "AV") {
      uint8_t cls = c == 'L' ? 0 : c == 'A' ? 1 : c == 'N' ? 2 : 255;
      if (cls == 255) return std::nullopt;
      labels[Characteristic::access_vector] = cls;
      seen[0] = true;
    } else if (key == "AC") {
      uint8_t cls = c == 'L' ? 0 : c == 'M' ? 1 : c == 'H' ? 2 : 255;
      if (cls == 255) return std::nullopt;
      labels[Characteristic::access_complexity] = cls;
      seen[1] = true;
    } else if (key == "Au") {
      uint8_t cls = c == 'N' ? 0 : c == 'S' ? 1 : c == 'M' ? 2 : 255;
      if (cls == 255) return std::nullopt;
      labels[Characteristic::authentication] = cls;
      seen[2] = true;
    } else if (key == "C") {
      auto cls = impact(c);
      if (!cls) return std::nullopt;
      labels[Characteristic::confidentiality] = *cls;
      seen[3] = true;
    } else if (key == "I") {
      auto cls = impact(c);
      if (!cls) return std::nullopt;
      labels[Characteristic::integrity] = *cls;
      seen[4] = true;
    } else if (key == "A") {
      auto cls = impact(c);
      if (!cls) return std::nullopt;
      labels[Characteristic::availability] = *cls;
      seen[5] = true;
    }
    // Temporal/environmental metrics, if present, are ignored.
  }
  for (bool s : seen) {
    if (!s) return std::nullopt;
  }
  labels[Characteristic::severity] = severity_cls;
  return labels;
}

/// CVSS-2 qualitative severity from the base score: [0,4) Low, [4,7) Medium,
/// [7,10] High.
inline uint8_t severity_from_base_score(double score) {
  if (score < 4.0) return 0;
  if (score < 7.0) return 1;
  return 2;
}

// ---------------------------------------------------------------------------
// filtering and splitting
// ---------------------------------------------------------------------------

inline constexpr std::string_view kRejectMarker = "** REJECT **";

struct FilterStats {
  size_t n_input = 0;
  size_t n_reject = 0;
  size_t n_no_cvss2 = 0;
  size_t n_kept = 0;
};

/// Drop rejected entries and entries without a full CVSS-2 label set.
/// Order-preserving and idempotent.
inline std::vector<VulnRecord> filter_corpus(const std::vector<VulnRecord>& records,
                                             FilterStats* stats = nullptr) {
  FilterStats s;
  s.n_input = records.size();
  std::vector<VulnRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.description.find(kRejectMarker) != std::string::npos) {
      ++s.n_reject;
      continue;
    }
    if (!r.labels.has_value()) {
      ++s.n_no_cvss2;
      continue;
    }
    out.push_back(r);
  }
  s.n_kept = out.size();
  if (stats) *stats = s;
  return out;
}

struct DatasetSplit {
  std::vector<VulnRecord> train;  // year < split_year
  std::vector<VulnRecord> test;   // year >= split_year
  int split_year = 0;
};

inline std::map<int, size_t> year_histogram(const std::vector<VulnRecord>& records) {
  std::map<int, size_t> hist;
  for (const auto& r : records) ++hist[r.year];
  return hist;
}

inline DatasetSplit split_by_year(const std::vector<VulnRecord>& records, int split_year) {
  DatasetSplit split;
  split.split_year = split_year;
  for (const auto& r : records) {
    (r.year < split_year ? split.train : split.test).push_back(r);
  }
  if (split.train.empty() || split.test.empty()) {
    std::ostringstream msg;
    msg << "split_year " << split_year << " leaves an empty "
        << (split.train.empty() ? "training" : "testing") << " side; year histogram:";
    for (const auto& [year, count] : year_histogram(records)) {
      msg << " " << year << ":" << count;
    }
    throw DataError(msg.str());
  }
  return split;
}

// ---------------------------------------------------------------------------
// corpus file format (TSV, UTF-8)
// ---------------------------------------------------------------------------
//
//   # driftva corpus v1
//   # cve_id<TAB>year<TAB>description<TAB>7 class columns ("-" when unlabeled)
//
// Descriptions have tabs/newlines folded to spaces on write, so one line is
// always one record and fixtures stay diff-able.

inline constexpr std::string_view kCorpusHeader = "# driftva corpus v1";

inline std::string sanitize_description(std::string_view desc) {
  std::string out(desc);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

inline std::string corpus_to_string(const std::vector<VulnRecord>& records) {
  std::ostringstream out;
  out << kCorpusHeader << "\n";
  out << "# cve_id\tyear\tdescription\tconfidentiality\tintegrity\tavailability\t"
         "access_vector\taccess_complexity\tauthentication\tseverity\n";
  for (const auto& r : records) {
    out << r.cve_id << '\t' << r.year << '\t' << sanitize_description(r.description);
    for (auto c : kAllCharacteristics) {
      out << '\t';
      if (r.labels.has_value()) {
        out << class_name(c, (*r.labels)[c]);
      } else {
        out << '-';
      }
    }
    out << '\n';
  }
  return out.str();
}

inline void write_corpus(const std::string& path, const std::vector<VulnRecord>& records) {
  write_file(path, corpus_to_string(records));
}

inline std::vector<VulnRecord> corpus_from_string(std::string_view content,
                                                  std::string_view origin = "<memory>") {
  std::vector<VulnRecord> records;
  size_t line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3 + kNumCharacteristics) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": expected 10 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    VulnRecord r;
    r.cve_id = fields[0];
    if (!valid_cve_id(r.cve_id)) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": malformed CVE id: " + r.cve_id);
    }
    r.year = std::stoi(fields[1]);
    if (r.year < 1988) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": year out of range: " + fields[1]);
    }
    r.description = fields[2];
    bool any_label = false, all_labels = true;
    LabelSet labels;
    for (size_t i = 0; i < kNumCharacteristics; ++i) {
      const std::string& f = fields[3 + i];
      if (f == "-") {
        all_labels = false;
      } else {
        labels[kAllCharacteristics[i]] = class_from_name(kAllCharacteristics[i], f);
        any_label = true;
      }
    }
    if (any_label && !all_labels) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_no) +
                      ": partial label set for " + r.cve_id);
    }
    if (all_labels) r.labels = labels;
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<VulnRecord> read_corpus(const std::string& path) {
  return corpus_from_string(read_file(path), path);
}

}  // namespace driftva
