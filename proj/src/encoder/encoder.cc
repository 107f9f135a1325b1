// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "encoder/encoder.h"

#include <cmath>

#include "autodiff/ops.h"
#include "common/io.h"

namespace vfkit::encoder {

using ad::Tensor;

dsp::FeatureMatrix EncoderFeatures(const dsp::AudioBuffer &audio,
                                   const dsp::MelConfig &cfg) {
  dsp::FeatureMatrix feats = dsp::LogMel(audio, cfg);
  for (int64_t c = 0; c < feats.cols; ++c) {
    double mean = 0.0;
    for (int64_t r = 0; r < feats.rows; ++r) mean += feats.at(r, c);
    mean /= static_cast<double>(feats.rows);
    for (int64_t r = 0; r < feats.rows; ++r) feats.at(r, c) -= mean;
  }
  return feats;
}

std::vector<dsp::FeatureMatrix> WindowSlices(const dsp::FeatureMatrix &features) {
  if (features.rows == 0 || features.cols == 0)
    ThrowInvalid("window_slices: empty features");
  std::vector<dsp::FeatureMatrix> windows;
  auto slice = [&](auto row_of) {
    dsp::FeatureMatrix w;
    w.rows = kWindowFrames;
    w.cols = features.cols;
    w.data.resize(w.rows * w.cols);
    for (int64_t r = 0; r < w.rows; ++r)
      std::copy_n(&features.data[row_of(r) * features.cols], features.cols,
                  &w.data[r * w.cols]);
    windows.push_back(std::move(w));
  };
  if (features.rows < kWindowFrames) {
    slice([&](int64_t r) { return r % features.rows; });
    return windows;
  }
  for (int64_t start = 0; start + kWindowFrames <= features.rows;
       start += kWindowShift)
    slice([&](int64_t r) { return start + r; });
  return windows;
}

template <typename T>
EncoderNet<T>::EncoderNet(EncoderConfig config) : config_(config) {
  if (config.n_mels < 1 || config.hidden < 1 || config.embedding_dim < 1)
    ThrowInvalid("encoder config dimensions must be positive");
  const int64_t h = config.hidden;
  int64_t din = config.n_mels;
  for (int l = 0; l < kNumLstmLayers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    params_.Add(p + "w_ih", {din, 4 * h});
    params_.Add(p + "w_hh", {h, 4 * h});
    params_.Add(p + "bias", {4 * h});
    din = h;
  }
  params_.Add("proj.weight", {h, config.embedding_dim});
  params_.Add("proj.bias", {config.embedding_dim});
  params_.Add("ge2e.w", {1});
  params_.Add("ge2e.b", {1});
}

template <typename T>
void EncoderNet<T>::Initialize(uint64_t seed) {
  Rng rng(seed, 0x656e63);
  const int64_t h = config_.hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (int l = 0; l < kNumLstmLayers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    for (const char *n : {"w_ih", "w_hh", "bias"}) {
      Tensor<T> t = params_.Get(p + n);
      ad::InitUniform(t, bound, rng);
    }
    auto b = params_.Get(p + "bias").mutable_values();
    for (int64_t j = h; j < 2 * h; ++j) b[j] += T(1);
  }
  Tensor<T> w = params_.Get("proj.weight");
  ad::InitXavierUniform(w, h, config_.embedding_dim, rng);
  for (T &v : params_.Get("proj.bias").mutable_values()) v = T(0);
  params_.Get("ge2e.w").mutable_values()[0] = T(10);
  params_.Get("ge2e.b").mutable_values()[0] = T(-5);
}

template <typename T>
std::vector<ad::LayerSpec> EncoderNet<T>::layers() const {
  std::vector<ad::LayerSpec> out;
  for (int l = 0; l < kNumLstmLayers; ++l) {
    ad::LayerSpec s;
    s.name = "lstm" + std::to_string(l);
    s.kind = ad::LayerKind::kLstm;
    s.units = config_.hidden;
    out.push_back(s);
  }
  ad::LayerSpec proj;
  proj.name = "proj";
  proj.kind = ad::LayerKind::kFc;
  proj.units = config_.embedding_dim;
  out.push_back(proj);
  return out;
}

template <typename T>
Tensor<T> EncoderNet<T>::Embed(const Tensor<T> &windows) const {
  if (windows.rank() != 3 || windows.dim(2) != config_.n_mels)
    ThrowInvalid("encoder input must be [B, frames, " +
                 std::to_string(config_.n_mels) + "], got " +
                 ad::ShapeToString(windows.shape()));
  Tensor<T> x = windows;
  for (int l = 0; l < kNumLstmLayers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    x = ad::Lstm(x, params_.Get(p + "w_ih"), params_.Get(p + "w_hh"),
                 params_.Get(p + "bias"));
  }
  Tensor<T> last = ad::SelectStep(x, x.dim(1) - 1);
  return ad::Linear(last, params_.Get("proj.weight"), params_.Get("proj.bias"));
}

namespace {

template <typename T>
Tensor<T> StackWindows(const std::vector<dsp::FeatureMatrix> &windows, int n_mels) {
  std::vector<T> data;
  data.reserve(windows.size() * kWindowFrames * n_mels);
  for (const auto &w : windows) {
    if (w.rows != kWindowFrames || w.cols != n_mels)
      ThrowInvalid("encoder window must be " + std::to_string(kWindowFrames) +
                   "x" + std::to_string(n_mels));
    for (double v : w.data) data.push_back(static_cast<T>(v));
  }
  return Tensor<T>::FromValues(
      {static_cast<int64_t>(windows.size()), kWindowFrames, n_mels},
      std::move(data));
}

void NormalizeInPlace(std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  const double n = std::sqrt(s);
  if (!(n > 0.0)) ThrowInvalid("cannot normalize a zero embedding");
  for (double &x : v) x /= n;
}

}  // namespace

template <typename T>
std::vector<double> EmbedWindow(const dsp::FeatureMatrix &window,
                                const EncoderNet<T> &model) {
  ad::NoGradGuard no_grad;
  Tensor<T> out = model.Embed(StackWindows<T>({window}, model.config().n_mels));
  return std::vector<double>(out.values().begin(), out.values().end());
}

template <typename T>
SpeakerEmbedding DVector(const dsp::AudioBuffer &audio, const EncoderNet<T> &model) {
  if (audio.size() < kMinDvectorSamples)
    ThrowInvalid("too-short audio for a d-vector: " + std::to_string(audio.size()) +
                 " samples, need " + std::to_string(kMinDvectorSamples));
  dsp::MelConfig mel;
  mel.n_mels = model.config().n_mels;
  const auto windows = WindowSlices(EncoderFeatures(audio, mel));
  ad::NoGradGuard no_grad;
  Tensor<T> out = model.Embed(StackWindows<T>(windows, mel.n_mels));
  const int64_t dim = model.config().embedding_dim;
  std::vector<double> mean(dim, 0.0);
  for (size_t w = 0; w < windows.size(); ++w) {
    std::vector<double> e(out.values().begin() + w * dim,
                          out.values().begin() + (w + 1) * dim);
    NormalizeInPlace(e);
    for (int64_t i = 0; i < dim; ++i) mean[i] += e[i];
  }
  for (double &v : mean) v /= static_cast<double>(windows.size());
  NormalizeInPlace(mean);
  return SpeakerEmbedding{std::move(mean)};
}

nlohmann::json EncoderConfigToJson(const EncoderConfig &cfg) {
  return {{"n_mels", cfg.n_mels}, {"hidden", cfg.hidden},
          {"embedding_dim", cfg.embedding_dim}, {"lstm_layers", kNumLstmLayers}};
}

EncoderConfig EncoderConfigFromJson(const nlohmann::json &j) {
  try {
    EncoderConfig cfg;
    cfg.n_mels = j.at("n_mels").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.embedding_dim = j.at("embedding_dim").get<int>();
    if (j.at("lstm_layers").get<int>() != kNumLstmLayers)
      ThrowFormat("encoder must have exactly 3 LSTM layers");
    return cfg;
  } catch (const nlohmann::json::exception &e) {
    ThrowFormat(std::string("bad encoder config: ") + e.what());
  }
}

nlohmann::json EncoderMeta(const EncoderModel &model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto &l : model.layers()) layers.push_back(ad::LayerSpecToJson(l));
  return {{"model_kind", "encoder"},
          {"encoder_config", EncoderConfigToJson(model.config())},
          {"layers", layers}};
}

void SaveEncoder(const std::filesystem::path &path, const EncoderModel &model) {
  ad::WriteCheckpoint(path, EncoderMeta(model), model.params());
}

EncoderModel EncoderFromCheckpoint(const ad::Checkpoint &ckpt,
                                   const nlohmann::json &config,
                                   const std::string &prefix) {
  EncoderModel model(EncoderConfigFromJson(config));
  ad::LoadParameters(ckpt, model.params(), prefix);
  return model;
}

EncoderModel LoadEncoder(const std::filesystem::path &path) {
  const ad::Checkpoint ckpt = ad::ReadCheckpoint(path);
  if (ckpt.model_kind() != "encoder")
    ThrowFormat(path.string() + ": expected model_kind encoder, got '" +
                ckpt.model_kind() + "'");
  return EncoderFromCheckpoint(ckpt, ckpt.header.at("encoder_config"));
}

template class EncoderNet<float>;
template class EncoderNet<double>;
template std::vector<double> EmbedWindow(const dsp::FeatureMatrix &,
                                         const EncoderNet<float> &);
template std::vector<double> EmbedWindow(const dsp::FeatureMatrix &,
                                         const EncoderNet<double> &);
template SpeakerEmbedding DVector(const dsp::AudioBuffer &, const EncoderNet<float> &);
template SpeakerEmbedding DVector(const dsp::AudioBuffer &, const EncoderNet<double> &);

}  // namespace vfkit::encoder
