// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "datagen/manifest.h"
#include "datagen/triplet.h"
#include "encoder/encoder.h"
#include "eval/sdr.h"
#include "voicefilter/enhance.h"
#include "voicefilter/model.h"

namespace vfkit::eval {

struct SdrRow {
  std::string utterance_id;
  double sdr_noisy_db = 0.0;
  double sdr_enhanced_db = 0.0;
};

struct SdrReport {
  std::vector<SdrRow> rows;
  Aggregates noisy;
  Aggregates enhanced;
  int64_t skipped = 0;
};

// Builds the mask provider for one triplet; the oracle needs the sources,
// the network only the reference.
using MaskFactory = std::function<voicefilter::MaskProvider(const datagen::TripletAudio &)>;

// The permutation-invariant variant has no reference input; of its two
// masks the one giving the higher SDR against the clean source is used.
MaskFactory NetworkMaskFactory(const voicefilter::VoiceFilterModel &model,
                               const encoder::EncoderModel &encoder);
MaskFactory OracleMaskFactory();

// For each triplet: enhance the mixture, score noisy and enhanced against
// the clean signal (enhanced output aligned to the clean length). Row ids
// are "<index>_<clean id>". Triplets that fail to load or process are
// logged and skipped; more than 10% skipped is an error, as is an empty
// triplet list ("empty manifest").
SdrReport Evaluate(const datagen::CorpusManifest &manifest,
                   const std::vector<datagen::TrainingTriplet> &triplets,
                   const MaskFactory &mask_factory);

// CSV with header utterance_id,sdr_noisy_db,sdr_enhanced_db.
std::string EncodeReportCsv(const SdrReport &report);
// Aggregates as JSON.
std::string EncodeReportJson(const SdrReport &report);
// Human-readable summary for stdout.
std::string FormatReportSummary(const SdrReport &report);
// Writes the CSV to path and the JSON next to it (same stem, .json).
void WriteReport(const std::filesystem::path &csv_path, const SdrReport &report);
std::filesystem::path ReportSidecarPath(const std::filesystem::path &csv_path);

}  // namespace vfkit::eval
