// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "common/io.h"
#include "datagen/synth.h"

namespace vfkit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("vfkit_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline datagen::CorpusManifest SmallCorpus(const std::filesystem::path &dir, int speakers = 3,
                                           int utts = 3, uint64_t seed = 5,
                                           int test_speakers = 0) {
  datagen::SynthOptions o;
  o.n_speakers = speakers;
  o.utts_per_speaker = utts;
  o.seed = seed;
  o.test_speakers = test_speakers;
  return datagen::SynthToyCorpus(o, dir);
}

inline std::string FileBytes(const std::filesystem::path &p) { return ReadFileBytes(p); }

}  // namespace vfkit::testing
