// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "voicefilter/train.h"

#include <cmath>

#include "autodiff/ops.h"
#include "common/io.h"
#include "common/rng.h"
#include "datagen/triplet.h"
#include "dsp/stft.h"
#include "voicefilter/loss.h"

namespace vfkit::voicefilter {
namespace {

using ad::Tensor;

// Full-length magnitudes of one triplet, float, frame-major.
struct Example {
  int64_t frames = 0;
  std::vector<float> noisy, clean, interference;
  const encoder::SpeakerEmbedding *dvec = nullptr;
};

std::vector<float> MagnitudeOf(dsp::AudioBuffer audio, int64_t min_samples,
                               int64_t *frames) {
  if (audio.size() < min_samples) audio.samples.resize(min_samples, 0.0);
  const dsp::MagnitudeSpectrogram mag = dsp::Magnitude(dsp::Stft(audio));
  *frames = mag.frames;
  return std::vector<float>(mag.data.begin(), mag.data.end());
}

Example PrepareExample(const datagen::CorpusManifest &manifest,
                       const datagen::TrainingTriplet &t, const DvectorTable &dvectors,
                       int64_t segment_samples) {
  const datagen::TripletAudio audio = datagen::LoadTripletAudio(manifest, t);
  Example ex;
  auto it = dvectors.find(t.reference_id);
  if (it == dvectors.end()) ThrowInvalid("no d-vector for reference " + t.reference_id);
  ex.dvec = &it->second;
  int64_t fc = 0, fi = 0;
  ex.noisy = MagnitudeOf(audio.noisy, segment_samples, &ex.frames);
  ex.clean = MagnitudeOf(audio.clean, segment_samples, &fc);
  ex.interference = MagnitudeOf(audio.interference, segment_samples, &fi);
  if (fc != ex.frames || fi != ex.frames)
    ThrowInvalid("triplet signals differ in length: " + t.clean_id);
  return ex;
}

template <typename V>
std::vector<V> Crop(const std::vector<V> &src, int64_t offset, int64_t frames,
                    int64_t bins) {
  return std::vector<V>(src.begin() + offset * bins,
                        src.begin() + (offset + frames) * bins);
}

}  // namespace

DvectorTable ComputeDvectors(const datagen::CorpusManifest &manifest,
                             const std::vector<datagen::TrainingTriplet> &triplets,
                             const encoder::EncoderModel &encoder) {
  DvectorTable out;
  for (const auto &t : triplets) {
    if (out.count(t.reference_id)) continue;
    out[t.reference_id] =
        encoder::DVector(datagen::LoadUtterance(manifest, t.reference_id), encoder);
  }
  return out;
}

VoiceFilterModel TrainVoiceFilter(const datagen::CorpusManifest &manifest,
                                  const std::vector<datagen::TrainingTriplet> &triplets,
                                  const DvectorTable &dvectors,
                                  const VoiceFilterTrainConfig &config,
                                  const ad::ProgressCallback &progress,
                                  const std::optional<std::filesystem::path> &out,
                                  const encoder::EncoderModel *encoder) {
  if (config.steps < 0) ThrowInvalid("steps must be non-negative");
  if (config.batch_size < 1) ThrowInvalid("batch size must be >= 1");
  if (triplets.empty()) ThrowInvalid("empty triplet list");
  const dsp::StftConfig stft;
  if (config.segment_samples < stft.fft_size)
    ThrowInvalid("segment shorter than one STFT frame");
  const VoiceFilterConfig &mc = config.model;
  if (mc.bins != stft.bins())
    ThrowInvalid("model expects " + std::to_string(mc.bins) + " bins, STFT gives " +
                 std::to_string(stft.bins()));

  std::vector<Example> examples;
  examples.reserve(triplets.size());
  for (const auto &t : triplets) {
    datagen::ValidateTriplet(manifest, t);
    examples.push_back(PrepareExample(manifest, t, dvectors, config.segment_samples));
    if (!mc.permutation_invariant &&
        static_cast<int>(examples.back().dvec->values.size()) != mc.dvector_dim)
      ThrowInvalid("d-vector dimension does not match the model");
  }

  VoiceFilterModel model(mc);
  model.Initialize(config.seed);
  ad::Adam<float> adam(config.adam);
  auto save = [&] {
    if (out) SaveVoiceFilter(*out, model, encoder);
  };

  const int64_t seg_frames = dsp::StftFrameCount(config.segment_samples, stft);
  const int64_t bins = mc.bins;
  const float power = static_cast<float>(mc.power);
  for (int64_t step = 1; step <= config.steps; ++step) {
    Rng rng(config.seed, static_cast<uint64_t>(step));
    model.params().ZeroGrad();
    Tensor<float> total;
    for (int b = 0; b < config.batch_size; ++b) {
      const Example &ex = examples[rng.Below(examples.size())];
      const int64_t offset = rng.Below(ex.frames - seg_frames + 1);
      const auto noisy = Crop(ex.noisy, offset, seg_frames, bins);
      const auto clean = Crop(ex.clean, offset, seg_frames, bins);
      std::vector<float> input(noisy.size());
      for (size_t i = 0; i < noisy.size(); ++i) input[i] = std::pow(noisy[i], power);
      auto x = Tensor<float>::FromValues({seg_frames, bins}, std::move(input));
      Tensor<float> d;
      if (!mc.permutation_invariant)
        d = Tensor<float>::FromValues(
            {mc.dvector_dim},
            std::vector<float>(ex.dvec->values.begin(), ex.dvec->values.end()));
      Tensor<float> mask = model.Forward(x, d);
      Tensor<float> loss;
      if (mc.permutation_invariant) {
        const auto interf = Crop(ex.interference, offset, seg_frames, bins);
        loss = PermutationInvariantLoss<float>(
            ad::SliceLast(mask, 0, bins), ad::SliceLast(mask, bins, 2 * bins), noisy,
            clean, interf, mc.power);
      } else {
        loss = CompressedMaskLoss<float>(mask, noisy, clean, mc.power);
      }
      total = total.defined() ? ad::Add(total, loss) : loss;
    }
    total = ad::Scale(total, 1.0f / static_cast<float>(config.batch_size));
    if (!std::isfinite(total.item()))
      throw Error(Error::Kind::kDiverged,
                  "diverged: non-finite loss at step " + std::to_string(step));
    ad::Backward(total);
    ad::TrainStepReport report{step, total.item(), model.params().GradNorm()};
    if (config.clip_grad_norm > 0) model.params().ClipGradNorm(config.clip_grad_norm);
    adam.Step(model.params());
    if (progress) progress(report);
    if (config.checkpoint_every > 0 && step % config.checkpoint_every == 0) save();
  }
  save();
  return model;
}

}  // namespace vfkit::voicefilter
