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
#include <string_view>

#include "driftva/common.hpp"
#include "driftva/util.hpp"

namespace driftva {

// Every persisted artifact carries the same envelope: tool version, a hash of
// the run configuration, the seed, and a self-check hash over its own bytes
// (computed with the hash field zeroed). The envelope contains nothing
// volatile, so identical runs produce identical files.

inline constexpr std::string_view kArtifactMagic = "# driftva artifact v1";
inline constexpr std::string_view kSelfHashKey = "# self_fnv64 ";
inline constexpr std::string_view kSelfHashPlaceholder = "0000000000000000";

struct ArtifactInfo {
  std::string kind;
  std::string tool;
  std::string config_hash;
  uint64_t seed = 0;
};

inline std::string seal_artifact(const std::string& kind, const std::string& config_hash,
                                 uint64_t seed, std::string_view payload) {
  std::string head;
  head += kArtifactMagic;
  head += "\n# tool ";
  head += kToolVersion;
  head += "\n# kind " + kind;
  head += "\n# config_hash " + config_hash;
  head += "\n# seed " + std::to_string(seed);
  head += "\n";
  head += kSelfHashKey;

  std::string with_placeholder = head + std::string(kSelfHashPlaceholder) + "\n" +
                                 std::string(payload);
  const std::string digest = hex64(fnv1a64(with_placeholder));
  return head + digest + "\n" + std::string(payload);
}

struct LoadedArtifact {
  ArtifactInfo info;
  std::string payload;
  bool self_check_ok = false;
};

inline LoadedArtifact open_artifact(std::string_view content, std::string_view origin) {
  auto lines = split(content, '\n');
  if (lines.size() < 6 || lines[0] != kArtifactMagic) {
    throw DataError(std::string(origin) + ": not a driftva artifact");
  }
  LoadedArtifact art;
  std::string stored_hash;
  size_t payload_start = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (starts_with(line, "# tool ")) art.info.tool = line.substr(7);
    else if (starts_with(line, "# kind ")) art.info.kind = line.substr(7);
    else if (starts_with(line, "# config_hash ")) art.info.config_hash = line.substr(14);
    else if (starts_with(line, "# seed ")) art.info.seed = std::stoull(line.substr(7));
    else if (starts_with(line, kSelfHashKey)) {
      stored_hash = line.substr(kSelfHashKey.size());
      payload_start = i + 1;
      break;
    } else {
      throw DataError(std::string(origin) + ": unexpected artifact header line: " + line);
    }
  }
  if (stored_hash.empty()) {
    throw DataError(std::string(origin) + ": artifact missing self hash");
  }
  for (size_t i = payload_start; i < lines.size(); ++i) {
    art.payload += lines[i];
    if (i + 1 < lines.size()) art.payload += '\n';
  }

  // Recompute with the hash zeroed out.
  std::string zeroed;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i >= 1 && starts_with(lines[i], kSelfHashKey) && i + 1 == payload_start) {
      zeroed += std::string(kSelfHashKey) + std::string(kSelfHashPlaceholder);
    } else {
      zeroed += lines[i];
    }
    if (i + 1 < lines.size()) zeroed += '\n';
  }
  art.self_check_ok = hex64(fnv1a64(zeroed)) == stored_hash;
  return art;
}

inline LoadedArtifact load_artifact(const std::string& path) {
  return open_artifact(read_file(path), path);
}

inline void write_artifact(const std::string& path, const std::string& kind,
                           const std::string& config_hash, uint64_t seed,
                           std::string_view payload) {
  write_file(path, seal_artifact(kind, config_hash, seed, payload));
}

}  // namespace driftva
