// tinyasr/manifest.hpp

// Copyright 2026  tinyasr contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYASR_MANIFEST_HPP_
#define TINYASR_MANIFEST_HPP_

// Utterance manifests: one JSON object per line, each naming an utterance,
// its transcript and either a raw audio file or a precomputed feature file.
// Loading validates every line and reports all problems at once.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tinyasr/common.hpp"
#include "tinyasr/targets.hpp"

namespace tinyasr {

struct ManifestEntry {
  std::string utterance_id;
  std::string audio_path;    // exactly one of audio_path and
  std::string feature_path;  // feature_path is set
  std::string transcript;
  std::size_t word_count = 0;

  bool has_features() const { return !feature_path.empty(); }
  const std::string& data_path() const {
    return has_features() ? feature_path : audio_path;
  }
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// Reads a manifest, resolving relative data paths against the manifest's own
// directory.  Every malformed line is collected; a single DataError lists
// them all.  Referenced data files must exist.
inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();

  Manifest manifest;
  std::map<std::string, std::size_t> first_line;
  std::vector<std::string> errors;
  std::string raw;
  std::size_t line_no = 0;

  auto complain = [&](const std::string& what) {
    errors.push_back("line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      complain(std::string("not valid JSON (") + e.what() + ")");
      continue;
    }
    if (!obj.is_object()) {
      complain("expected a JSON object");
      continue;
    }

    bool ok = true;
    for (const auto& item : obj.items()) {
      const std::string& key = item.key();
      if (key != "utterance_id" && key != "audio_path" &&
          key != "feature_path" && key != "transcript" &&
          key != "word_count") {
        complain("unknown key \"" + key + "\"");
        ok = false;
      }
    }

    ManifestEntry entry;
    if (!obj.contains("utterance_id") || !obj["utterance_id"].is_string() ||
        obj["utterance_id"].get<std::string>().empty()) {
      complain("missing or empty utterance_id");
      ok = false;
    } else {
      entry.utterance_id = obj["utterance_id"].get<std::string>();
      auto seen = first_line.find(entry.utterance_id);
      if (seen != first_line.end()) {
        complain("duplicate utterance id \"" + entry.utterance_id +
                 "\" (first seen on line " + std::to_string(seen->second) +
                 ")");
        ok = false;
      } else {
        first_line.emplace(entry.utterance_id, line_no);
      }
    }

    bool has_audio = obj.contains("audio_path");
    bool has_feats = obj.contains("feature_path");
    if (has_audio == has_feats) {
      complain("need exactly one of audio_path and feature_path");
      ok = false;
    } else {
      const char* key = has_audio ? "audio_path" : "feature_path";
      if (!obj[key].is_string() || obj[key].get<std::string>().empty()) {
        complain(std::string(key) + " must be a non-empty string");
        ok = false;
      } else {
        std::filesystem::path p = obj[key].get<std::string>();
        if (p.is_relative()) p = base / p;
        std::string resolved = p.lexically_normal().string();
        if (!std::filesystem::exists(p)) {
          complain("data file does not exist: " + resolved);
          ok = false;
        }
        (has_audio ? entry.audio_path : entry.feature_path) = resolved;
      }
    }

    if (!obj.contains("transcript") || !obj["transcript"].is_string() ||
        obj["transcript"].get<std::string>().empty()) {
      complain("missing or empty transcript");
      ok = false;
    } else {
      entry.transcript = obj["transcript"].get<std::string>();
    }

    if (!obj.contains("word_count") ||
        !obj["word_count"].is_number_unsigned()) {
      complain("missing or non-integer word_count");
      ok = false;
    } else {
      entry.word_count = obj["word_count"].get<std::size_t>();
      if (!entry.transcript.empty()) {
        std::size_t actual = split_words(entry.transcript).size();
        if (actual != entry.word_count) {
          complain("word_count says " + std::to_string(entry.word_count) +
                   " but the transcript has " + std::to_string(actual) +
                   " words");
          ok = false;
        }
      }
    }

    if (ok) manifest.entries.push_back(std::move(entry));
  }

  if (!errors.empty()) {
    std::string msg = "manifest " + path + " has " +
                      std::to_string(errors.size()) + " problem(s):";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw DataError(msg);
  }
  return manifest;
}

// Writes one JSON object per line with a fixed key order, so identical
// manifests serialize to identical bytes.
inline void save_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  for (const ManifestEntry& entry : manifest.entries) {
    nlohmann::ordered_json obj;
    obj["utterance_id"] = entry.utterance_id;
    if (entry.has_features())
      obj["feature_path"] = entry.feature_path;
    else
      obj["audio_path"] = entry.audio_path;
    obj["transcript"] = entry.transcript;
    obj["word_count"] = entry.word_count;
    out << obj.dump() << "\n";
  }
  if (!out) throw DataError("failed writing manifest: " + path);
}

}  // namespace tinyasr

#endif  // TINYASR_MANIFEST_HPP_
