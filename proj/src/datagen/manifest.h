// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dsp/audio.h"

namespace vfkit::datagen {

constexpr double kMinUtteranceSeconds = 0.25;

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string path;  // relative paths resolve against the manifest directory
  double duration_s = 0.0;
};

// One JSONL record per line:
//   {"utterance_id": str, "speaker_id": str, "path": str, "duration_s": float}
struct CorpusManifest {
  std::vector<UtteranceRecord> records;
  std::string split = "train";
  std::filesystem::path base_dir;

  const UtteranceRecord &Find(const std::string &utterance_id) const;
  std::filesystem::path ResolvePath(const UtteranceRecord &record) const;
  // Utterance indices per speaker, keyed by speaker id in sorted order.
  std::map<std::string, std::vector<size_t>> BySpeaker() const;
};

// Unique ids, non-empty fields and duration >= 0.25 s.
void ValidateManifest(const CorpusManifest &manifest);

CorpusManifest ParseManifest(const std::string &text,
                             const std::filesystem::path &base_dir);
CorpusManifest ReadManifest(const std::filesystem::path &path);
std::string EncodeManifest(const CorpusManifest &manifest);
void WriteManifest(const std::filesystem::path &path, const CorpusManifest &manifest);

dsp::AudioBuffer LoadUtterance(const CorpusManifest &manifest,
                               const std::string &utterance_id);

// Triplet list JSONL: {"clean": id, "interference": id, "reference": id,
// "weight": float}.
struct TrainingTriplet {
  std::string clean_id;
  std::string interference_id;
  std::string reference_id;
  double weight = 1.0;
  std::string noisy_path;  // optional cache; not serialized when empty

  bool operator==(const TrainingTriplet &) const = default;
};

std::vector<TrainingTriplet> ParseTriplets(const std::string &text);
std::vector<TrainingTriplet> ReadTriplets(const std::filesystem::path &path);
std::string EncodeTriplets(const std::vector<TrainingTriplet> &triplets);
void WriteTriplets(const std::filesystem::path &path,
                   const std::vector<TrainingTriplet> &triplets);

}  // namespace vfkit::datagen
