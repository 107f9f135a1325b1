// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "voicefilter/model.h"

#include <algorithm>
#include <cmath>

#include "autodiff/checkpoint.h"
#include "autodiff/ops.h"
#include "common/io.h"
#include "common/rng.h"

namespace vfkit::voicefilter {

using ad::Tensor;

const char *LstmModeName(LstmMode mode) {
  switch (mode) {
    case LstmMode::kNone: return "none";
    case LstmMode::kUni: return "uni";
    case LstmMode::kBi: return "bi";
  }
  return "?";
}

LstmMode ParseLstmMode(const std::string &name) {
  if (name == "none") return LstmMode::kNone;
  if (name == "uni") return LstmMode::kUni;
  if (name == "bi") return LstmMode::kBi;
  ThrowInvalid("unknown LSTM mode '" + name + "' (expected none, uni or bi)");
}

VoiceFilterConfig VoiceFilterConfig::TestScale() {
  VoiceFilterConfig cfg;
  cfg.conv_filters = 16;
  cfg.lstm_hidden = 64;
  cfg.fc_hidden = 128;
  return cfg;
}

int VoiceFilterConfig::lstm_input_dim() const {
  return last_conv_filters * bins + (permutation_invariant ? 0 : dvector_dim);
}

int VoiceFilterConfig::fc_input_dim() const {
  switch (lstm_mode) {
    case LstmMode::kNone: return lstm_input_dim();
    case LstmMode::kUni: return lstm_hidden;
    case LstmMode::kBi: return 2 * lstm_hidden;
  }
  return 0;
}

namespace {

void ValidateConfig(const VoiceFilterConfig &c) {
  if (c.bins < 1 || c.dvector_dim < 1 || c.conv_filters < 1 ||
      c.last_conv_filters < 1 || c.fc_hidden < 1 ||
      (c.lstm_mode != LstmMode::kNone && c.lstm_hidden < 1))
    ThrowInvalid("voicefilter config: sizes must be positive");
  if (!(c.power > 0.0 && c.power <= 1.0))
    ThrowInvalid("voicefilter config: power must be in (0, 1]");
}

std::string ConvName(size_t i) { return "cnn" + std::to_string(i + 1); }

}  // namespace

nlohmann::json VoiceFilterConfigToJson(const VoiceFilterConfig &c) {
  return {{"bins", c.bins},
          {"dvector_dim", c.dvector_dim},
          {"conv_filters", c.conv_filters},
          {"last_conv_filters", c.last_conv_filters},
          {"lstm_hidden", c.lstm_hidden},
          {"fc_hidden", c.fc_hidden},
          {"lstm_mode", LstmModeName(c.lstm_mode)},
          {"permutation_invariant", c.permutation_invariant},
          {"power", c.power},
          {"frame_norm", c.frame_norm}};
}

VoiceFilterConfig VoiceFilterConfigFromJson(const nlohmann::json &j) {
  try {
    VoiceFilterConfig c;
    c.bins = j.at("bins").get<int>();
    c.dvector_dim = j.at("dvector_dim").get<int>();
    c.conv_filters = j.at("conv_filters").get<int>();
    c.last_conv_filters = j.at("last_conv_filters").get<int>();
    c.lstm_hidden = j.at("lstm_hidden").get<int>();
    c.fc_hidden = j.at("fc_hidden").get<int>();
    c.lstm_mode = ParseLstmMode(j.at("lstm_mode").get<std::string>());
    c.permutation_invariant = j.at("permutation_invariant").get<bool>();
    c.power = j.at("power").get<double>();
    c.frame_norm = j.at("frame_norm").get<bool>();
    ValidateConfig(c);
    return c;
  } catch (const nlohmann::json::exception &e) {
    ThrowFormat(std::string("bad voicefilter config: ") + e.what());
  } catch (const Error &e) {
    ThrowFormat(e.what());
  }
}

template <typename T>
VoiceFilterNet<T>::VoiceFilterNet(VoiceFilterConfig config) : config_(config) {
  ValidateConfig(config_);
  int64_t cin = 1;
  for (size_t i = 0; i < kConvGeometry.size(); ++i) {
    const auto &g = kConvGeometry[i];
    const int64_t cout =
        i + 1 == kConvGeometry.size() ? config_.last_conv_filters : config_.conv_filters;
    params_.Add(ConvName(i) + ".kernel", {g.width_time, g.width_freq, cin, cout});
    params_.Add(ConvName(i) + ".bias", {cout});
    cin = cout;
  }
  const int64_t din = config_.lstm_input_dim();
  const int64_t h = config_.lstm_hidden;
  if (config_.lstm_mode != LstmMode::kNone) {
    std::vector<std::string> dirs = {"lstm.fwd."};
    if (config_.lstm_mode == LstmMode::kBi) dirs.push_back("lstm.bwd.");
    for (const auto &p : dirs) {
      params_.Add(p + "w_ih", {din, 4 * h});
      params_.Add(p + "w_hh", {h, 4 * h});
      params_.Add(p + "bias", {4 * h});
    }
  }
  params_.Add("fc1.weight", {config_.fc_input_dim(), config_.fc_hidden});
  params_.Add("fc1.bias", {config_.fc_hidden});
  params_.Add("fc2.weight", {config_.fc_hidden, config_.mask_outputs()});
  params_.Add("fc2.bias", {config_.mask_outputs()});
}

template <typename T>
void VoiceFilterNet<T>::Initialize(uint64_t seed) {
  Rng rng(seed, 0x7666);
  for (size_t i = 0; i < kConvGeometry.size(); ++i) {
    Tensor<T> k = params_.Get(ConvName(i) + ".kernel");
    const int64_t taps = k.dim(0) * k.dim(1);
    ad::InitXavierUniform(k, taps * k.dim(2), taps * k.dim(3), rng);
    for (T &v : params_.Get(ConvName(i) + ".bias").mutable_values()) v = T(0);
  }
  if (config_.lstm_mode != LstmMode::kNone) {
    const int64_t h = config_.lstm_hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    std::vector<std::string> dirs = {"lstm.fwd."};
    if (config_.lstm_mode == LstmMode::kBi) dirs.push_back("lstm.bwd.");
    for (const auto &p : dirs) {
      // The input is ~2300 values wide; +-1/sqrt(H) would saturate the gates.
      Tensor<T> w_ih = params_.Get(p + "w_ih");
      ad::InitXavierUniform(w_ih, w_ih.dim(0), w_ih.dim(1), rng);
      for (const char *n : {"w_hh", "bias"}) {
        Tensor<T> t = params_.Get(p + n);
        ad::InitUniform(t, bound, rng);
      }
      auto b = params_.Get(p + "bias").mutable_values();
      for (int64_t j = h; j < 2 * h; ++j) b[j] += T(1);
    }
  }
  for (const char *fc : {"fc1", "fc2"}) {
    Tensor<T> w = params_.Get(std::string(fc) + ".weight");
    ad::InitXavierUniform(w, w.dim(0), w.dim(1), rng);
    for (T &v : params_.Get(std::string(fc) + ".bias").mutable_values()) v = T(0);
  }
}

template <typename T>
std::vector<ad::LayerSpec> VoiceFilterNet<T>::layers() const {
  std::vector<ad::LayerSpec> out;
  for (size_t i = 0; i < kConvGeometry.size(); ++i) {
    const auto &g = kConvGeometry[i];
    ad::LayerSpec s;
    s.name = ConvName(i);
    s.kind = ad::LayerKind::kConv2d;
    s.width_time = g.width_time;
    s.width_freq = g.width_freq;
    s.dilation_time = g.dilation_time;
    s.dilation_freq = g.dilation_freq;
    s.units = i + 1 == kConvGeometry.size() ? config_.last_conv_filters
                                            : config_.conv_filters;
    s.activation = ad::Activation::kRelu;
    out.push_back(s);
  }
  if (config_.lstm_mode != LstmMode::kNone) {
    ad::LayerSpec s;
    s.name = "lstm";
    s.kind = config_.lstm_mode == LstmMode::kBi ? ad::LayerKind::kBiLstm
                                                : ad::LayerKind::kLstm;
    s.units = config_.lstm_hidden;
    out.push_back(s);
  }
  ad::LayerSpec fc1;
  fc1.name = "fc1";
  fc1.units = config_.fc_hidden;
  fc1.activation = ad::Activation::kRelu;
  out.push_back(fc1);
  ad::LayerSpec fc2;
  fc2.name = "fc2";
  fc2.units = config_.mask_outputs();
  fc2.activation = ad::Activation::kSigmoid;
  out.push_back(fc2);
  return out;
}

template <typename T>
Tensor<T> VoiceFilterNet<T>::ConvFeatures(const Tensor<T> &compressed,
                                          const Tensor<T> &dvector) const {
  if (compressed.rank() != 2 || compressed.dim(1) != config_.bins)
    ThrowInvalid("voicefilter input must be [frames, " + std::to_string(config_.bins) +
                 "], got " + ad::ShapeToString(compressed.shape()));
  const int64_t frames = compressed.dim(0);
  if (frames < 1) ThrowInvalid("voicefilter input has no frames");
  if (!config_.permutation_invariant &&
      (!dvector.defined() || dvector.numel() != config_.dvector_dim))
    ThrowInvalid("d-vector must have " + std::to_string(config_.dvector_dim) +
                 " values");
  Tensor<T> x = ad::Reshape(compressed, {frames, config_.bins, 1});
  for (size_t i = 0; i < kConvGeometry.size(); ++i) {
    const auto &g = kConvGeometry[i];
    x = ad::Relu(ad::Conv2d(x, params_.Get(ConvName(i) + ".kernel"),
                            params_.Get(ConvName(i) + ".bias"), g.dilation_time,
                            g.dilation_freq));
  }
  x = ad::Reshape(x, {frames, int64_t{config_.last_conv_filters} * config_.bins});
  Tensor<T> d;
  if (!config_.permutation_invariant) d = ad::Reshape(dvector, {config_.dvector_dim});
  if (config_.frame_norm) {
    // Unit-RMS frames next to a unit-RMS d-vector.
    x = ad::StandardizeRows(x);
    if (d.defined()) d = ad::Scale(d, static_cast<T>(std::sqrt(config_.dvector_dim)));
  }
  if (d.defined()) x = ad::AppendToRows(x, d);
  return x;
}

template <typename T>
Tensor<T> VoiceFilterNet<T>::Logits(const Tensor<T> &compressed,
                                    const Tensor<T> &dvector) const {
  Tensor<T> x = ConvFeatures(compressed, dvector);
  const int64_t frames = x.dim(0);
  if (config_.lstm_mode != LstmMode::kNone) {
    x = ad::Reshape(x, {1, frames, x.dim(1)});
    ad::LstmWeights<T> fwd{params_.Get("lstm.fwd.w_ih"), params_.Get("lstm.fwd.w_hh"),
                           params_.Get("lstm.fwd.bias")};
    if (config_.lstm_mode == LstmMode::kBi) {
      ad::LstmWeights<T> bwd{params_.Get("lstm.bwd.w_ih"),
                             params_.Get("lstm.bwd.w_hh"), params_.Get("lstm.bwd.bias")};
      x = ad::LstmLayer(x, fwd, &bwd);
    } else {
      x = ad::LstmLayer(x, fwd);
    }
    x = ad::Reshape(x, {frames, x.dim(2)});
  }
  x = ad::FullyConnected(x, params_.Get("fc1.weight"), params_.Get("fc1.bias"),
                         ad::Activation::kRelu);
  return ad::Linear(x, params_.Get("fc2.weight"), params_.Get("fc2.bias"));
}

template <typename T>
Tensor<T> VoiceFilterNet<T>::Forward(const Tensor<T> &compressed,
                                     const Tensor<T> &dvector) const {
  return ad::Sigmoid(Logits(compressed, dvector));
}

namespace {

template <typename T>
Tensor<T> CompressedInput(const dsp::MagnitudeSpectrogram &mag, int bins, double p) {
  if (mag.bins != bins)
    ThrowInvalid("spectrogram has " + std::to_string(mag.bins) +
                 " bins, model expects " + std::to_string(bins));
  if (mag.frames < 1) ThrowInvalid("spectrogram has no frames");
  const dsp::MagnitudeSpectrogram c = dsp::PowerLawCompress(mag, p);
  return Tensor<T>::FromValues({mag.frames, mag.bins},
                               std::vector<T>(c.data.begin(), c.data.end()));
}

// Sigmoid evaluated in double from the float logits, kept off 0 and 1.
SoftMask MaskFromLogits(std::span<const double> logits, int64_t frames, int64_t bins,
                        int64_t stride, int64_t offset) {
  SoftMask m;
  m.frames = frames;
  m.bins = bins;
  m.data.resize(frames * bins);
  for (int64_t t = 0; t < frames; ++t) {
    for (int64_t f = 0; f < bins; ++f) {
      const double z = logits[t * stride + offset + f];
      const double s = 1.0 / (1.0 + std::exp(-z));
      m.data[t * bins + f] = std::clamp(s, kMaskMargin, 1.0 - kMaskMargin);
    }
  }
  return m;
}

template <typename T>
std::vector<double> RunLogits(const dsp::MagnitudeSpectrogram &noisy_mag,
                              const Tensor<T> &dvector, const VoiceFilterNet<T> &model) {
  ad::NoGradGuard no_grad;
  const auto &c = model.config();
  Tensor<T> logits =
      model.Logits(CompressedInput<T>(noisy_mag, c.bins, c.power), dvector);
  return std::vector<double>(logits.values().begin(), logits.values().end());
}

}  // namespace

template <typename T>
SoftMask ForwardMask(const dsp::MagnitudeSpectrogram &noisy_mag,
                     const encoder::SpeakerEmbedding &dvec,
                     const VoiceFilterNet<T> &model) {
  const auto &c = model.config();
  Tensor<T> d;
  if (!c.permutation_invariant) {
    if (static_cast<int>(dvec.values.size()) != c.dvector_dim)
      ThrowInvalid("d-vector has " + std::to_string(dvec.values.size()) +
                   " values, model expects " + std::to_string(c.dvector_dim));
    d = Tensor<T>::FromValues({c.dvector_dim},
                              std::vector<T>(dvec.values.begin(), dvec.values.end()));
  }
  const auto logits = RunLogits(noisy_mag, d, model);
  return MaskFromLogits(logits, noisy_mag.frames, c.bins, c.mask_outputs(), 0);
}

template <typename T>
std::pair<SoftMask, SoftMask> ForwardMaskPair(const dsp::MagnitudeSpectrogram &noisy_mag,
                                              const VoiceFilterNet<T> &model) {
  const auto &c = model.config();
  if (!c.permutation_invariant)
    ThrowInvalid("model produces a single mask; a d-vector is required");
  const auto logits = RunLogits(noisy_mag, Tensor<T>(), model);
  return {MaskFromLogits(logits, noisy_mag.frames, c.bins, c.mask_outputs(), 0),
          MaskFromLogits(logits, noisy_mag.frames, c.bins, c.mask_outputs(), c.bins)};
}

namespace {

constexpr const char *kEncoderPrefix = "encoder/";

nlohmann::json VoiceFilterMeta(const VoiceFilterModel &model,
                               const encoder::EncoderModel *enc) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto &l : model.layers()) layers.push_back(ad::LayerSpecToJson(l));
  nlohmann::json meta = {{"model_kind", "voicefilter"},
                         {"voicefilter_config", VoiceFilterConfigToJson(model.config())},
                         {"layers", layers}};
  if (enc) meta["encoder_config"] = encoder::EncoderConfigToJson(enc->config());
  return meta;
}

ad::ParameterSet<float> CombinedParams(const VoiceFilterModel &model,
                                       const encoder::EncoderModel *enc) {
  ad::ParameterSet<float> all;
  auto copy = [&all](const ad::ParameterSet<float> &src, const std::string &prefix) {
    for (const auto &[name, t] : src.entries()) {
      Tensor<float> dst = all.Add(prefix + name, t.shape());
      std::copy(t.values().begin(), t.values().end(), dst.mutable_values().begin());
    }
  };
  copy(model.params(), "");
  if (enc) copy(enc->params(), kEncoderPrefix);
  return all;
}

}  // namespace

std::string EncodeVoiceFilter(const VoiceFilterModel &model,
                              const encoder::EncoderModel *enc) {
  return ad::EncodeCheckpoint(VoiceFilterMeta(model, enc), CombinedParams(model, enc));
}

void SaveVoiceFilter(const std::filesystem::path &path, const VoiceFilterModel &model,
                     const encoder::EncoderModel *enc) {
  ad::WriteCheckpoint(path, VoiceFilterMeta(model, enc), CombinedParams(model, enc));
}

VoiceFilterBundle LoadVoiceFilter(const std::filesystem::path &path) {
  const ad::Checkpoint ckpt = ad::ReadCheckpoint(path);
  if (ckpt.model_kind() != "voicefilter")
    ThrowFormat(path.string() + ": expected model_kind voicefilter, got '" +
                ckpt.model_kind() + "'");
  if (!ckpt.header.contains("voicefilter_config"))
    ThrowFormat(path.string() + ": missing voicefilter_config");
  VoiceFilterBundle out{
      VoiceFilterModel(VoiceFilterConfigFromJson(ckpt.header.at("voicefilter_config"))),
      std::nullopt};
  ad::Checkpoint own;
  own.header = ckpt.header;
  const std::string prefix = kEncoderPrefix;
  bool has_encoder = false;
  for (const auto &t : ckpt.tensors) {
    if (t.name.compare(0, prefix.size(), prefix) == 0)
      has_encoder = true;
    else
      own.tensors.push_back(t);
  }
  ad::LoadParameters(own, out.model.params());
  if (has_encoder) {
    if (!ckpt.header.contains("encoder_config"))
      ThrowFormat(path.string() + ": encoder tensors without encoder_config");
    out.encoder = encoder::EncoderFromCheckpoint(ckpt, ckpt.header.at("encoder_config"),
                                                 prefix);
  }
  return out;
}

template class VoiceFilterNet<float>;
template class VoiceFilterNet<double>;
template SoftMask ForwardMask(const dsp::MagnitudeSpectrogram &,
                              const encoder::SpeakerEmbedding &,
                              const VoiceFilterNet<float> &);
template SoftMask ForwardMask(const dsp::MagnitudeSpectrogram &,
                              const encoder::SpeakerEmbedding &,
                              const VoiceFilterNet<double> &);
template std::pair<SoftMask, SoftMask> ForwardMaskPair(const dsp::MagnitudeSpectrogram &,
                                                       const VoiceFilterNet<float> &);
template std::pair<SoftMask, SoftMask> ForwardMaskPair(const dsp::MagnitudeSpectrogram &,
                                                       const VoiceFilterNet<double> &);

}  // namespace vfkit::voicefilter
