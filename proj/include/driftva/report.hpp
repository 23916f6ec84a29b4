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

#include <string>

#include <json.hpp>

#include "driftva/artifact.hpp"
#include "driftva/common.hpp"
#include "driftva/driftlab.hpp"
#include "driftva/metrics.hpp"
#include "driftva/timecv.hpp"
#include "driftva/util.hpp"

namespace driftva {

using Json = nlohmann::json;

// JSON artifacts embed the envelope under an "artifact" key; the self hash is
// computed over the canonical dump with the hash field zeroed. nlohmann's
// object keys serialize sorted and doubles shortest-round-trip, so the bytes
// are stable across identical runs.

inline std::string seal_json_artifact(const std::string& kind, const std::string& config_hash,
                                      uint64_t seed, Json body) {
  body["artifact"] = {
      {"tool", kToolVersion},
      {"kind", kind},
      {"config_hash", config_hash},
      {"seed", seed},
      {"self_fnv64", std::string(kSelfHashPlaceholder)},
  };
  const std::string zeroed = body.dump(2);
  body["artifact"]["self_fnv64"] = hex64(fnv1a64(zeroed));
  return body.dump(2) + "\n";
}

struct JsonArtifact {
  ArtifactInfo info;
  Json body;
  bool self_check_ok = false;
};

inline JsonArtifact open_json_artifact(std::string_view content, std::string_view origin) {
  Json body;
  try {
    body = Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string(origin) + ": bad JSON artifact: " + e.what());
  }
  if (!body.contains("artifact")) {
    throw DataError(std::string(origin) + ": JSON artifact missing envelope");
  }
  JsonArtifact art;
  const auto& env = body["artifact"];
  art.info.kind = env.value("kind", "");
  art.info.tool = env.value("tool", "");
  art.info.config_hash = env.value("config_hash", "");
  art.info.seed = env.value("seed", 0ULL);
  const std::string stored = env.value("self_fnv64", "");
  Json zeroed = body;
  zeroed["artifact"]["self_fnv64"] = std::string(kSelfHashPlaceholder);
  art.self_check_ok = hex64(fnv1a64(zeroed.dump(2))) == stored;
  art.body = std::move(body);
  return art;
}

// ---------------------------------------------------------------------------
// report bodies
// ---------------------------------------------------------------------------

inline Json triple_json(const MetricTriple& t) {
  return Json{{"accuracy", t.accuracy}, {"macro_f", t.macro_f}, {"weighted_f", t.weighted_f}};
}

inline Json candidate_json(const CandidateResult& c) {
  Json folds = Json::array();
  for (const auto& f : c.folds) {
    Json jf = triple_json(f.triple);
    jf["degenerate"] = f.degenerate;
    folds.push_back(jf);
  }
  return Json{
      {"classifier", classifier_name(c.spec.kind)},
      {"hyper", c.spec.hyper},
      {"config", c.config.config_id},
      {"mean", triple_json(c.mean)},
      {"folds", folds},  // per-fold scores enable external statistical tests
      {"work_units", c.work_units},
  };
}

inline Json selection_json(const SelectionResult& sel) {
  Json candidates = Json::array();
  for (const auto& c : sel.candidates) candidates.push_back(candidate_json(c));
  return Json{
      {"characteristic", std::string(characteristic_name(sel.characteristic))},
      {"k", sel.k},
      {"best", candidate_json(sel.best())},
      {"best_index", sel.best_index},
      {"candidates", candidates},
  };
}

struct EvalEntry {
  Characteristic vc = Characteristic::confidentiality;
  std::string classifier;
  int config_id = 1;
  MetricTriple metrics;
  FScores fscores;
  std::vector<size_t> support;
  size_t n_features = 0;
  size_t n_test = 0;
};

inline Json eval_entry_json(const EvalEntry& e) {
  return Json{
      {"characteristic", std::string(characteristic_name(e.vc))},
      {"classifier", e.classifier},
      {"config", e.config_id},
      {"accuracy", e.metrics.accuracy},
      {"macro_f", e.metrics.macro_f},
      {"weighted_f", e.metrics.weighted_f},
      {"per_class_f", e.fscores.per_class_f},
      {"per_class_precision", e.fscores.per_class_precision},
      {"per_class_recall", e.fscores.per_class_recall},
      {"support", e.support},
      {"zero_division_hit", e.fscores.zero_division_hit},
      {"n_features", e.n_features},
      {"n_test", e.n_test},
  };
}

inline Json drift_json(const DriftReport& r) {
  Json new_terms = Json::object();
  for (const auto& [year, count] : r.new_terms_by_year) {
    new_terms[std::to_string(year)] = count;
  }
  Json zero_cases = Json::array();
  for (const auto& c : r.all_zero_cases) {
    zero_cases.push_back(Json{{"cve_id", c.cve_id}, {"year", c.year}});
  }
  return Json{
      {"new_terms_by_year", new_terms},
      {"all_zero_cases", zero_cases},
      {"coverage",
       Json{{"ok", r.coverage_ok},
            {"checked", r.coverage_checked},
            {"counterexamples", r.coverage_counterexamples}}},
      {"density", r.density},
  };
}

inline Json comparison_json(const ModelComparison& cmp) {
  Json variants = Json::object();
  for (const auto& v : cmp.variants) {
    variants[v.name] = Json{
        {"accuracy", v.metrics.accuracy},
        {"macro_f", v.metrics.macro_f},
        {"weighted_f", v.metrics.weighted_f},
        {"density", v.density},
        {"n_features", v.n_features},
    };
  }
  return variants;
}

// ---------------------------------------------------------------------------
// static SVG chart (vocabulary growth per year)
// ---------------------------------------------------------------------------

inline std::string drift_svg(const std::map<int, size_t>& new_terms_by_year) {
  const int bar_w = 28, gap = 6, height = 240, margin = 36;
  const size_t n = new_terms_by_year.size();
  const int width = margin * 2 + static_cast<int>(n) * (bar_w + gap);
  size_t max_count = 1;
  for (const auto& [y, c] : new_terms_by_year) max_count = std::max(max_count, c);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height + 2 * margin << "\">\n";
  svg << "  <text x=\"" << margin << "\" y=\"18\" font-size=\"13\" font-family=\"sans-serif\">"
      << "New vocabulary terms per year</text>\n";
  int x = margin;
  for (const auto& [year, count] : new_terms_by_year) {
    const int h = static_cast<int>(static_cast<double>(count) / static_cast<double>(max_count) *
                                   height);
    const int y_top = margin + (height - h);
    svg << "  <rect x=\"" << x << "\" y=\"" << y_top << "\" width=\"" << bar_w << "\" height=\""
        << h << "\" fill=\"#4878a8\"/>\n";
    svg << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << margin + height + 14
        << "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"middle\">" << year
        << "</text>\n";
    svg << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << y_top - 3
        << "\" font-size=\"9\" font-family=\"sans-serif\" text-anchor=\"middle\">" << count
        << "</text>\n";
    x += bar_w + gap;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace driftva
