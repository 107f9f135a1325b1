// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <vector>

#include "autodiff/checkpoint.h"
#include "autodiff/layer_spec.h"
#include "autodiff/params.h"
#include "dsp/audio.h"
#include "dsp/mel.h"

namespace vfkit::encoder {

constexpr int kEmbeddingDim = 256;
constexpr int kWindowFrames = 160;  // 1600 ms at a 10 ms hop
constexpr int kWindowShift = 80;    // 50% overlap
constexpr int kNumLstmLayers = 3;
constexpr int64_t kMinDvectorSamples = dsp::kSampleRate / 4;  // 250 ms

struct EncoderConfig {
  int n_mels = 40;
  int hidden = 256;
  int embedding_dim = kEmbeddingDim;
};

// d-vector: unit L2 norm.
struct SpeakerEmbedding {
  std::vector<double> values;
};

// Log-mel features with the per-utterance mean of each mel channel removed,
// which makes them invariant to input gain.
dsp::FeatureMatrix EncoderFeatures(const dsp::AudioBuffer &audio,
                                   const dsp::MelConfig &cfg = {});

// 160-frame windows starting every 80 frames. Inputs shorter than one
// window yield a single window tiled cyclically from frame 0.
std::vector<dsp::FeatureMatrix> WindowSlices(const dsp::FeatureMatrix &features);

// Three stacked LSTM layers and a linear projection of the last frame.
// The parameter set also carries the scale/offset of the training loss.
template <typename T>
class EncoderNet {
 public:
  // All parameters zero; call Initialize() for a trainable start point.
  explicit EncoderNet(EncoderConfig config = {});

  // Uniform +-1/sqrt(H) LSTM weights with forget bias +1, Xavier-uniform
  // projection; loss scale 10 and offset -5.
  void Initialize(uint64_t seed);

  const EncoderConfig &config() const { return config_; }
  ad::ParameterSet<T> &params() { return params_; }
  const ad::ParameterSet<T> &params() const { return params_; }
  std::vector<ad::LayerSpec> layers() const;

  ad::Tensor<T> loss_scale() const { return params_.Get("ge2e.w"); }
  ad::Tensor<T> loss_offset() const { return params_.Get("ge2e.b"); }

  // windows [B, 160, n_mels] -> unnormalized embeddings [B, embedding_dim].
  ad::Tensor<T> Embed(const ad::Tensor<T> &windows) const;

 private:
  EncoderConfig config_;
  ad::ParameterSet<T> params_;
};

using EncoderModel = EncoderNet<float>;

// Unnormalized embedding of one 160 x n_mels window.
template <typename T>
std::vector<double> EmbedWindow(const dsp::FeatureMatrix &window,
                                const EncoderNet<T> &model);

// Window embeddings are L2-normalized, averaged and re-normalized.
template <typename T>
SpeakerEmbedding DVector(const dsp::AudioBuffer &audio, const EncoderNet<T> &model);

nlohmann::json EncoderMeta(const EncoderModel &model);
void SaveEncoder(const std::filesystem::path &path, const EncoderModel &model);
EncoderModel LoadEncoder(const std::filesystem::path &path);
// Rebuilds an encoder from checkpoint fields: "encoder_config" in the header
// and tensors named prefix + parameter name.
EncoderModel EncoderFromCheckpoint(const ad::Checkpoint &ckpt,
                                   const nlohmann::json &config,
                                   const std::string &prefix = "");
nlohmann::json EncoderConfigToJson(const EncoderConfig &cfg);
EncoderConfig EncoderConfigFromJson(const nlohmann::json &j);

}  // namespace vfkit::encoder
