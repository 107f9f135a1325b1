// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autodiff/layer_spec.h"
#include "autodiff/params.h"
#include "dsp/audio.h"
#include "dsp/stft.h"
#include "encoder/encoder.h"

namespace vfkit::voicefilter {

enum class LstmMode { kNone, kUni, kBi };
const char *LstmModeName(LstmMode mode);
LstmMode ParseLstmMode(const std::string &name);  // none | uni | bi

// Kernel geometry of the eight convolution layers, in order:
// {width_time, width_freq, dilation_time, dilation_freq}.
struct ConvGeometry {
  int width_time, width_freq, dilation_time, dilation_freq;
};
inline constexpr std::array<ConvGeometry, 8> kConvGeometry = {{
    {1, 7, 1, 1},
    {7, 1, 1, 1},
    {5, 5, 1, 1},
    {5, 5, 2, 1},
    {5, 5, 4, 1},
    {5, 5, 8, 1},
    {5, 5, 16, 1},
    {1, 1, 1, 1},
}};

struct VoiceFilterConfig {
  int bins = 257;
  int dvector_dim = encoder::kEmbeddingDim;
  int conv_filters = 64;      // CNN 1-7
  int last_conv_filters = 8;  // CNN 8
  int lstm_hidden = 400;
  int fc_hidden = 600;
  LstmMode lstm_mode = LstmMode::kUni;
  // Speaker-independent baseline: no d-vector input, two masks out.
  bool permutation_invariant = false;
  double power = 0.3;  // exponent of the compressed input and loss
  // Standardize each frame of the flattened CNN output and scale the
  // d-vector by sqrt(dvector_dim) before concatenation. Parameter-free.
  bool frame_norm = true;

  // Full-size network.
  static VoiceFilterConfig Default() { return {}; }
  // 16 conv filters, LSTM 64, FC 128: small enough to train in minutes.
  static VoiceFilterConfig TestScale();

  int lstm_input_dim() const;
  int fc_input_dim() const;
  int mask_outputs() const { return permutation_invariant ? 2 * bins : bins; }
};

nlohmann::json VoiceFilterConfigToJson(const VoiceFilterConfig &cfg);
VoiceFilterConfig VoiceFilterConfigFromJson(const nlohmann::json &j);

// T x F soft mask, every entry strictly inside (0, 1).
struct SoftMask {
  int64_t frames = 0;
  int64_t bins = 0;
  std::vector<double> data;
};

// Smallest distance kept between a predicted mask value and 0 or 1.
constexpr double kMaskMargin = 1e-12;

// Conv stack -> per-frame flatten -> d-vector concat -> (bi)LSTM -> FC ->
// FC with sigmoid.
template <typename T>
class VoiceFilterNet {
 public:
  // All parameters zero.
  explicit VoiceFilterNet(VoiceFilterConfig config = VoiceFilterConfig::Default());

  // Xavier-uniform conv/FC/LSTM-input weights, zero conv/FC biases; LSTM
  // recurrent weights and biases uniform +-1/sqrt(H), forget-gate bias +1.
  void Initialize(uint64_t seed);

  const VoiceFilterConfig &config() const { return config_; }
  ad::ParameterSet<T> &params() { return params_; }
  const ad::ParameterSet<T> &params() const { return params_; }
  std::vector<ad::LayerSpec> layers() const;

  // compressed [T, F] input (|X|^p) and d-vector [dvector_dim] (ignored by
  // the permutation-invariant variant) -> pre-sigmoid logits
  // [T, mask_outputs()].
  ad::Tensor<T> Logits(const ad::Tensor<T> &compressed,
                       const ad::Tensor<T> &dvector) const;
  // Logits followed by the sigmoid.
  ad::Tensor<T> Forward(const ad::Tensor<T> &compressed,
                        const ad::Tensor<T> &dvector) const;
  // Per-frame input of the recurrent layer: conv output flattened to
  // last_conv_filters * F values (standardized under frame_norm) with the
  // d-vector appended.
  ad::Tensor<T> ConvFeatures(const ad::Tensor<T> &compressed,
                             const ad::Tensor<T> &dvector) const;

 private:
  VoiceFilterConfig config_;
  ad::ParameterSet<T> params_;
};

using VoiceFilterModel = VoiceFilterNet<float>;

// Mask for a noisy magnitude spectrogram. The permutation-invariant variant
// returns its first mask here; see ForwardMaskPair.
template <typename T>
SoftMask ForwardMask(const dsp::MagnitudeSpectrogram &noisy_mag,
                     const encoder::SpeakerEmbedding &dvec,
                     const VoiceFilterNet<T> &model);
template <typename T>
std::pair<SoftMask, SoftMask> ForwardMaskPair(const dsp::MagnitudeSpectrogram &noisy_mag,
                                              const VoiceFilterNet<T> &model);

// Checkpoints carry the encoder used for training (tensors prefixed
// "encoder/") so enhancement needs a single file.
struct VoiceFilterBundle {
  VoiceFilterModel model;
  std::optional<encoder::EncoderModel> encoder;
};

void SaveVoiceFilter(const std::filesystem::path &path, const VoiceFilterModel &model,
                     const encoder::EncoderModel *encoder);
std::string EncodeVoiceFilter(const VoiceFilterModel &model,
                              const encoder::EncoderModel *encoder);
VoiceFilterBundle LoadVoiceFilter(const std::filesystem::path &path);

}  // namespace vfkit::voicefilter
