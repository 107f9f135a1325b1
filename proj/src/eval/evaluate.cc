// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eval/evaluate.h"

#include <cstdio>

#include "common/io.h"
#include "common/log.h"
#include "dsp/stft.h"
#include "json.hpp"

namespace vfkit::eval {

MaskFactory NetworkMaskFactory(const voicefilter::VoiceFilterModel &model,
                               const encoder::EncoderModel &encoder) {
  return [&model, &encoder](const datagen::TripletAudio &audio) -> voicefilter::MaskProvider {
    if (!model.config().permutation_invariant)
      return voicefilter::NetworkMask(model, encoder::DVector(audio.reference, encoder));
    // Speaker-independent baseline: the output that scores higher against
    // the clean source plays the target.
    const auto spec = dsp::Stft(audio.noisy);
    auto [a, b] = voicefilter::ForwardMaskPair(dsp::Magnitude(spec), model);
    auto score = [&](const voicefilter::SoftMask &m) {
      return Sdr(AlignLength(voicefilter::ApplyMask(spec, m), audio.clean.size()), audio.clean);
    };
    const bool first = score(a) >= score(b);
    return [mask = first ? std::move(a) : std::move(b)](const dsp::MagnitudeSpectrogram &) {
      return mask;
    };
  };
}

MaskFactory OracleMaskFactory() {
  return [](const datagen::TripletAudio &audio) -> voicefilter::MaskProvider {
    const auto clean = dsp::Magnitude(dsp::Stft(audio.clean));
    const auto interf = dsp::Magnitude(dsp::Stft(audio.interference));
    return [mask = voicefilter::OracleRatioMask(clean, interf)](
               const dsp::MagnitudeSpectrogram &) { return mask; };
  };
}

SdrReport Evaluate(const datagen::CorpusManifest &manifest,
                   const std::vector<datagen::TrainingTriplet> &triplets,
                   const MaskFactory &mask_factory) {
  if (triplets.empty()) ThrowInvalid("empty manifest");
  SdrReport report;
  for (size_t i = 0; i < triplets.size(); ++i) {
    const auto &t = triplets[i];
    char id[32];
    std::snprintf(id, sizeof(id), "%04zu_", i);
    try {
      datagen::ValidateTriplet(manifest, t);
      const datagen::TripletAudio audio = datagen::LoadTripletAudio(manifest, t);
      const dsp::AudioBuffer enhanced =
          AlignLength(voicefilter::Enhance(audio.noisy, mask_factory(audio)),
                      audio.clean.size());
      report.rows.push_back(
          {id + t.clean_id, Sdr(audio.noisy, audio.clean), Sdr(enhanced, audio.clean)});
    } catch (const Error &e) {
      if (e.kind() == Error::Kind::kDiverged) throw;
      LogWarning("skipping triplet " + std::to_string(i) + " (" + t.clean_id +
                 "): " + e.what());
      ++report.skipped;
    }
  }
  const int64_t n = static_cast<int64_t>(triplets.size());
  if (report.skipped * 10 > n)
    ThrowInvalid("too many failures: " + std::to_string(report.skipped) + " of " +
                 std::to_string(n) + " triplets skipped");
  std::vector<double> noisy, enhanced;
  for (const auto &r : report.rows) {
    noisy.push_back(r.sdr_noisy_db);
    enhanced.push_back(r.sdr_enhanced_db);
  }
  report.noisy = Aggregate(noisy);
  report.enhanced = Aggregate(enhanced);
  return report;
}

namespace {

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string EncodeReportCsv(const SdrReport &report) {
  std::string out = "utterance_id,sdr_noisy_db,sdr_enhanced_db\n";
  for (const auto &r : report.rows)
    out += r.utterance_id + "," + Fixed(r.sdr_noisy_db) + "," + Fixed(r.sdr_enhanced_db) +
           "\n";
  return out;
}

std::string EncodeReportJson(const SdrReport &report) {
  nlohmann::ordered_json j;
  j["count"] = report.rows.size();
  j["skipped"] = report.skipped;
  j["sdr_noisy_db"] = {{"mean", report.noisy.mean}, {"median", report.noisy.median}};
  j["sdr_enhanced_db"] = {{"mean", report.enhanced.mean},
                          {"median", report.enhanced.median}};
  j["median_improvement_db"] = report.enhanced.median - report.noisy.median;
  return j.dump(2) + "\n";
}

std::string FormatReportSummary(const SdrReport &report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%-12s %10s %10s\n%-12s %10.3f %10.3f\n%-12s %10.3f %10.3f\n"
                "utterances=%zu skipped=%lld\n",
                "", "mean_db", "median_db", "noisy", report.noisy.mean,
                report.noisy.median, "enhanced", report.enhanced.mean,
                report.enhanced.median, report.rows.size(),
                static_cast<long long>(report.skipped));
  return buf;
}

std::filesystem::path ReportSidecarPath(const std::filesystem::path &csv_path) {
  std::filesystem::path p = csv_path;
  if (p.extension() == ".json") return p.string() + ".json";
  return p.replace_extension(".json");
}

void WriteReport(const std::filesystem::path &csv_path, const SdrReport &report) {
  AtomicWriteFile(csv_path, EncodeReportCsv(report));
  AtomicWriteFile(ReportSidecarPath(csv_path), EncodeReportJson(report));
}

}  // namespace vfkit::eval
