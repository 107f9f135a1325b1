// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "encoder/train_encoder.h"

#include <algorithm>
#include <cmath>

#include "autodiff/ops.h"
#include "common/io.h"
#include "common/rng.h"
#include "encoder/ge2e.h"

namespace vfkit::encoder {
namespace {

constexpr float kMinLossScale = 1e-3f;

// Distinct indices drawn from [0, n).
std::vector<size_t> Choose(size_t n, size_t k, Rng &rng) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  for (size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.Below(n - i)]);
  idx.resize(k);
  return idx;
}

}  // namespace

EncoderModel TrainEncoder(const datagen::CorpusManifest &manifest,
                          const EncoderTrainConfig &config,
                          const ad::ProgressCallback &progress,
                          const std::optional<std::filesystem::path> &out) {
  if (config.steps < 0) ThrowInvalid("steps must be non-negative");
  const int m_utts = config.utterances_per_speaker;
  if (m_utts < 2) ThrowInvalid("utterances_per_speaker must be >= 2");

  // Speakers with enough utterances, in sorted id order.
  std::vector<std::vector<dsp::FeatureMatrix>> features;
  dsp::MelConfig mel;
  mel.n_mels = config.model.n_mels;
  for (const auto &[speaker, idx] : manifest.BySpeaker()) {
    if (static_cast<int>(idx.size()) < m_utts) continue;
    std::vector<dsp::FeatureMatrix> utts;
    for (size_t i : idx)
      utts.push_back(EncoderFeatures(
          LoadUtterance(manifest, manifest.records[i].utterance_id), mel));
    features.push_back(std::move(utts));
  }
  if (features.size() < 2)
    ThrowInvalid("insufficient speakers: need >= 2 speakers with >= " +
                 std::to_string(m_utts) + " utterances, found " +
                 std::to_string(features.size()));
  const int k_spk = std::min<int>(config.speakers_per_batch,
                                  static_cast<int>(features.size()));
  if (k_spk < 2) ThrowInvalid("speakers_per_batch must be >= 2");

  EncoderModel model(config.model);
  model.Initialize(config.seed);
  ad::Adam<float> adam(config.adam);
  auto save = [&] {
    if (out) SaveEncoder(*out, model);
  };

  const int n_mels = config.model.n_mels;
  for (int64_t step = 1; step <= config.steps; ++step) {
    Rng rng(config.seed, static_cast<uint64_t>(step));
    std::vector<float> batch;
    batch.reserve(static_cast<size_t>(k_spk) * m_utts * kWindowFrames * n_mels);
    for (size_t s : Choose(features.size(), k_spk, rng)) {
      const auto &utts = features[s];
      for (size_t u : Choose(utts.size(), m_utts, rng)) {
        const dsp::FeatureMatrix &f = utts[u];
        const int64_t start =
            f.rows > kWindowFrames ? rng.Below(f.rows - kWindowFrames + 1) : 0;
        for (int64_t r = 0; r < kWindowFrames; ++r) {
          const int64_t row = (start + r) % f.rows;
          for (int64_t c = 0; c < n_mels; ++c)
            batch.push_back(static_cast<float>(f.at(row, c)));
        }
      }
    }
    const int64_t n = int64_t{k_spk} * m_utts;
    auto windows = ad::Tensor<float>::FromValues({n, kWindowFrames, n_mels},
                                                 std::move(batch));
    model.params().ZeroGrad();
    auto emb = ad::L2NormalizeRows(model.Embed(windows));
    auto loss = Ge2eLoss(emb, k_spk, m_utts, model.loss_scale(), model.loss_offset());
    if (!std::isfinite(loss.item()))
      throw Error(Error::Kind::kDiverged, "diverged: non-finite loss at step " +
                                              std::to_string(step));
    ad::Backward(loss);
    ad::TrainStepReport report{step, loss.item(), model.params().GradNorm()};
    if (config.clip_grad_norm > 0) model.params().ClipGradNorm(config.clip_grad_norm);
    adam.Step(model.params());
    float &w = model.loss_scale().mutable_values()[0];
    w = std::max(w, kMinLossScale);
    if (progress) progress(report);
    if (config.checkpoint_every > 0 && step % config.checkpoint_every == 0) save();
  }
  save();
  return model;
}

}  // namespace vfkit::encoder
