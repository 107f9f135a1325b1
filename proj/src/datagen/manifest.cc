// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "datagen/manifest.h"

#include <set>
#include <sstream>

#include "common/io.h"
#include "dsp/wav.h"
#include "json.hpp"

namespace vfkit::datagen {

using OrderedJson = nlohmann::ordered_json;

const UtteranceRecord &CorpusManifest::Find(const std::string &utterance_id) const {
  for (const auto &r : records)
    if (r.utterance_id == utterance_id) return r;
  ThrowInvalid("unknown utterance id '" + utterance_id + "'");
}

std::filesystem::path CorpusManifest::ResolvePath(const UtteranceRecord &record) const {
  std::filesystem::path p(record.path);
  return p.is_absolute() ? p : base_dir / p;
}

std::map<std::string, std::vector<size_t>> CorpusManifest::BySpeaker() const {
  std::map<std::string, std::vector<size_t>> out;
  for (size_t i = 0; i < records.size(); ++i)
    out[records[i].speaker_id].push_back(i);
  return out;
}

void ValidateManifest(const CorpusManifest &manifest) {
  std::set<std::string> ids;
  for (const auto &r : manifest.records) {
    if (r.utterance_id.empty() || r.speaker_id.empty() || r.path.empty())
      ThrowInvalid("manifest record with empty field");
    if (!ids.insert(r.utterance_id).second)
      ThrowInvalid("duplicate utterance id '" + r.utterance_id + "'");
    if (!(r.duration_s >= kMinUtteranceSeconds))
      ThrowInvalid("utterance '" + r.utterance_id + "' shorter than 0.25 s");
  }
}

namespace {

template <typename Fn>
void ForEachJsonLine(const std::string &text, Fn fn) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception &e) {
      ThrowFormat("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

CorpusManifest ParseManifest(const std::string &text,
                             const std::filesystem::path &base_dir) {
  CorpusManifest m;
  m.base_dir = base_dir;
  ForEachJsonLine(text, [&](const nlohmann::json &j) {
    UtteranceRecord r;
    r.utterance_id = j.at("utterance_id").get<std::string>();
    r.speaker_id = j.at("speaker_id").get<std::string>();
    r.path = j.at("path").get<std::string>();
    r.duration_s = j.at("duration_s").get<double>();
    m.records.push_back(std::move(r));
  });
  ValidateManifest(m);
  return m;
}

CorpusManifest ReadManifest(const std::filesystem::path &path) {
  try {
    return ParseManifest(ReadFileBytes(path), path.parent_path());
  } catch (const Error &e) {
    if (e.kind() == Error::Kind::kIo) throw;
    ThrowFormat(path.string() + ": " + e.what());
  }
}

std::string EncodeManifest(const CorpusManifest &manifest) {
  std::string out;
  for (const auto &r : manifest.records) {
    OrderedJson j;
    j["utterance_id"] = r.utterance_id;
    j["speaker_id"] = r.speaker_id;
    j["path"] = r.path;
    j["duration_s"] = r.duration_s;
    out += j.dump() + "\n";
  }
  return out;
}

void WriteManifest(const std::filesystem::path &path, const CorpusManifest &manifest) {
  AtomicWriteFile(path, EncodeManifest(manifest));
}

dsp::AudioBuffer LoadUtterance(const CorpusManifest &manifest,
                               const std::string &utterance_id) {
  return dsp::ReadWav(manifest.ResolvePath(manifest.Find(utterance_id)));
}

std::vector<TrainingTriplet> ParseTriplets(const std::string &text) {
  std::vector<TrainingTriplet> out;
  ForEachJsonLine(text, [&](const nlohmann::json &j) {
    TrainingTriplet t;
    t.clean_id = j.at("clean").get<std::string>();
    t.interference_id = j.at("interference").get<std::string>();
    t.reference_id = j.at("reference").get<std::string>();
    t.weight = j.at("weight").get<double>();
    if (j.contains("noisy")) t.noisy_path = j.at("noisy").get<std::string>();
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<TrainingTriplet> ReadTriplets(const std::filesystem::path &path) {
  try {
    return ParseTriplets(ReadFileBytes(path));
  } catch (const Error &e) {
    if (e.kind() == Error::Kind::kIo) throw;
    ThrowFormat(path.string() + ": " + e.what());
  }
}

std::string EncodeTriplets(const std::vector<TrainingTriplet> &triplets) {
  std::string out;
  for (const auto &t : triplets) {
    OrderedJson j;
    j["clean"] = t.clean_id;
    j["interference"] = t.interference_id;
    j["reference"] = t.reference_id;
    j["weight"] = t.weight;
    if (!t.noisy_path.empty()) j["noisy"] = t.noisy_path;
    out += j.dump() + "\n";
  }
  return out;
}

void WriteTriplets(const std::filesystem::path &path,
                   const std::vector<TrainingTriplet> &triplets) {
  AtomicWriteFile(path, EncodeTriplets(triplets));
}

}  // namespace vfkit::datagen
