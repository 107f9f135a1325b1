// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>

#include "autodiff/ops.h"
#include "datagen/synth.h"
#include "datagen/triplet.h"
#include "doctest.h"
#include "dsp/stft.h"
#include "eval/sdr.h"
#include "support/fixtures.h"
#include "support/gradcheck.h"
#include "support/oracles.h"
#include "voicefilter/enhance.h"
#include "voicefilter/loss.h"
#include "voicefilter/model.h"
#include "voicefilter/train.h"

using namespace vfkit;
using namespace vfkit::voicefilter;
using ad::Tensor;
using TD = Tensor<double>;

namespace {

dsp::AudioBuffer Utterance(int speaker, int utt, int64_t samples = 0) {
  const auto speakers = datagen::MakeToySpeakers(4, 21);
  auto a = datagen::SynthesizeUtterance(speakers[speaker], 21, utt);
  if (samples > 0) a.samples.resize(samples);
  return a;
}

encoder::SpeakerEmbedding UnitVector(int dim, int hot) {
  encoder::SpeakerEmbedding e;
  e.values.assign(dim, 0.0);
  e.values[hot] = 1.0;
  return e;
}

VoiceFilterConfig TinyConfig() {
  VoiceFilterConfig c;
  c.dvector_dim = 8;
  c.conv_filters = 4;
  c.last_conv_filters = 2;
  c.lstm_hidden = 8;
  c.fc_hidden = 16;
  return c;
}

std::vector<double> Values(const ad::ParameterSet<float> &p) {
  std::vector<double> out;
  for (const auto &[name, t] : p.entries())
    for (float v : t.values()) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("default network layout") {
  VoiceFilterModel m;
  const auto layers = m.layers();
  REQUIRE(layers.size() == 11);
  for (int i = 0; i < 8; ++i) {
    CAPTURE(i);
    CHECK(layers[i].kind == ad::LayerKind::kConv2d);
    CHECK(layers[i].width_time == kConvGeometry[i].width_time);
    CHECK(layers[i].width_freq == kConvGeometry[i].width_freq);
    CHECK(layers[i].dilation_time == kConvGeometry[i].dilation_time);
    CHECK(layers[i].dilation_freq == 1);
    CHECK(layers[i].units == (i < 7 ? 64 : 8));
  }
  const int widths[8][2] = {{1, 7}, {7, 1}, {5, 5}, {5, 5}, {5, 5}, {5, 5}, {5, 5}, {1, 1}};
  const int dil[8] = {1, 1, 1, 2, 4, 8, 16, 1};
  for (int i = 0; i < 8; ++i) {
    CHECK(kConvGeometry[i].width_time == widths[i][0]);
    CHECK(kConvGeometry[i].width_freq == widths[i][1]);
    CHECK(kConvGeometry[i].dilation_time == dil[i]);
  }
  CHECK(layers[8].kind == ad::LayerKind::kLstm);
  CHECK(layers[8].units == 400);
  CHECK(layers[9].units == 600);
  CHECK(layers[10].units == 257);
  CHECK(m.config().lstm_input_dim() == 8 * 257 + 256);
  CHECK(m.params().Get("lstm.fwd.w_ih").shape() == ad::Shape{2312, 1600});
  CHECK(m.params().Get("fc2.weight").shape() == ad::Shape{600, 257});
}

TEST_CASE("lstm mode variants") {
  auto c = VoiceFilterConfig::TestScale();
  c.lstm_mode = LstmMode::kBi;
  VoiceFilterModel bi(c);
  CHECK(bi.layers()[8].kind == ad::LayerKind::kBiLstm);
  CHECK(bi.config().fc_input_dim() == 2 * c.lstm_hidden);
  c.lstm_mode = LstmMode::kNone;
  VoiceFilterModel none(c);
  CHECK(none.layers().size() == 10);
  CHECK(none.config().fc_input_dim() == c.lstm_input_dim());
  CHECK(ParseLstmMode("bi") == LstmMode::kBi);
  CHECK_THROWS_AS(ParseLstmMode("gru"), Error);
}

TEST_CASE("zero parameters give a uniform one-half mask") {
  VoiceFilterModel m(VoiceFilterConfig::TestScale());
  const auto mag = dsp::Magnitude(dsp::Stft(Utterance(0, 0, 16000)));
  const auto mask = ForwardMask(mag, UnitVector(256, 0), m);
  CHECK(mask.frames == mag.frames);
  CHECK(mask.bins == 257);
  for (double v : mask.data) CHECK(v == 0.5);
}

TEST_CASE("mask shape and open range for any frame count") {
  VoiceFilterModel m(VoiceFilterConfig::TestScale());
  m.Initialize(3);
  for (int64_t samples : {512, 768, 8000, 20000}) {
    const auto mag = dsp::Magnitude(dsp::Stft(Utterance(1, 0, samples)));
    const auto mask = ForwardMask(mag, UnitVector(256, 3), m);
    CHECK(mask.frames == mag.frames);
    CHECK(mask.bins == mag.bins);
    for (double v : mask.data) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
  // Saturated logits still land strictly inside the interval.
  for (float &w : m.params().Get("fc2.bias").mutable_values()) w = 200.0f;
  const auto mag = dsp::Magnitude(dsp::Stft(Utterance(1, 1, 8000)));
  for (double v : ForwardMask(mag, UnitVector(256, 3), m).data) CHECK(v < 1.0);
  for (float &w : m.params().Get("fc2.bias").mutable_values()) w = -200.0f;
  for (double v : ForwardMask(mag, UnitVector(256, 3), m).data) CHECK(v > 0.0);
}

TEST_CASE("forward_mask rejects mismatched inputs") {
  VoiceFilterModel m(VoiceFilterConfig::TestScale());
  dsp::MagnitudeSpectrogram bad{4, 129, std::vector<double>(4 * 129, 1.0)};
  CHECK_THROWS_AS(ForwardMask(bad, UnitVector(256, 0), m), Error);
  const auto mag = dsp::Magnitude(dsp::Stft(Utterance(0, 0, 4000)));
  CHECK_THROWS_AS(ForwardMask(mag, UnitVector(128, 0), m), Error);
}

TEST_CASE("d-vector is appended identically to every frame") {
  auto cfg = TinyConfig();
  VoiceFilterNet<double> m(cfg);
  m.Initialize(5);
  const int64_t T = 300;
  std::vector<double> frame(257);
  Rng rng(8);
  for (double &v : frame) v = rng.Uniform(0.0, 2.0);
  std::vector<double> x;
  for (int64_t t = 0; t < T; ++t) x.insert(x.end(), frame.begin(), frame.end());
  std::vector<double> d(8);
  for (double &v : d) v = rng.Uniform(-1.0, 1.0);
  const TD out = m.ConvFeatures(TD::FromValues({T, 257}, x), TD::FromValues({8}, d));
  const auto feats = out.values();
  const int64_t width = cfg.lstm_input_dim();
  REQUIRE(static_cast<int64_t>(feats.size()) == T * width);
  // Frames beyond the time receptive field of the conv stack see identical
  // input; GEMM tail kernels may differ in the last bit.
  for (int64_t t = 140; t < 160; ++t)
    for (int64_t k = 0; k < 2 * 257; ++k)
      REQUIRE(std::abs(feats[t * width + k] - feats[150 * width + k]) <=
              1e-12 * (1.0 + std::abs(feats[150 * width + k])));
  // Frame normalization scales the d-vector to unit RMS.
  for (int64_t t = 0; t < T; ++t)
    for (int k = 0; k < 8; ++k) REQUIRE(feats[t * width + 2 * 257 + k] == d[k] * std::sqrt(8.0));

  // Without it the raw conv rows and the d-vector pass through; standardizing
  // the raw rows by hand reproduces the normalized ones.
  cfg.frame_norm = false;
  VoiceFilterNet<double> raw(cfg);
  raw.Initialize(5);
  const TD raw_out = raw.ConvFeatures(TD::FromValues({T, 257}, x), TD::FromValues({8}, d));
  const auto rf = raw_out.values();
  for (int64_t t = 0; t < T; ++t)
    for (int k = 0; k < 8; ++k) REQUIRE(rf[t * width + 2 * 257 + k] == d[k]);
  for (int64_t t : {0, 150, 299}) {
    const int64_t n = 2 * 257;
    double mean = 0, var = 0;
    for (int64_t k = 0; k < n; ++k) mean += rf[t * width + k];
    mean /= n;
    for (int64_t k = 0; k < n; ++k) var += (rf[t * width + k] - mean) * (rf[t * width + k] - mean);
    var /= n;
    for (int64_t k = 0; k < n; ++k)
      CHECK(feats[t * width + k] ==
            doctest::Approx((rf[t * width + k] - mean) / std::sqrt(var + 1e-5)).epsilon(1e-9));
  }
}

TEST_CASE("duplicated conv frames concatenate to identical rows") {
  Rng rng(9);
  std::vector<double> x(5 * 6);
  for (double &v : x) v = rng.Uniform(-1.0, 1.0);
  std::copy(x.begin() + 6, x.begin() + 12, x.begin() + 18);  // frame 3 := frame 1
  const TD d = TD::FromValues({3}, {0.25, -0.5, 1.0});
  const TD y = ad::AppendToRows(TD::FromValues({5, 6}, x), d);
  const auto v = y.values();
  for (int k = 0; k < 9; ++k) CHECK(v[1 * 9 + k] == v[3 * 9 + k]);
}

TEST_CASE("compressed mask loss examples") {
  SUBCASE("exact reconstruction") {
    std::vector<double> noisy = {1.0, 4.0, 0.5, 2.0}, mask = {0.5, 0.25, 1.0, 0.75}, clean(4);
    for (int i = 0; i < 4; ++i) clean[i] = mask[i] * noisy[i];
    CHECK(CompressedMaskLoss(TD::FromValues({2, 2}, mask), std::span<const double>(noisy),
                             std::span<const double>(clean))
              .item() == 0.0);
  }
  SUBCASE("one bin") {
    const std::vector<double> one = {1.0};
    CHECK(CompressedMaskLoss(TD::FromValues({1, 1}, {0.0}), std::span<const double>(one),
                             std::span<const double>(one))
              .item() == 1.0);
  }
  SUBCASE("errors") {
    const std::vector<double> a = {1.0, 1.0}, neg = {1.0, -1.0};
    CHECK_THROWS_AS(CompressedMaskLoss(TD::FromValues({1, 3}, {0, 0, 0}),
                                       std::span<const double>(a), std::span<const double>(a)),
                    Error);
    CHECK_THROWS_AS(CompressedMaskLoss(TD::FromValues({1, 2}, {0, 0}),
                                       std::span<const double>(a), std::span<const double>(neg)),
                    Error);
    CHECK_THROWS_AS(CompressedMaskLoss(TD::FromValues({1, 2}, {0, 0}),
                                       std::span<const double>(a), std::span<const double>(a),
                                       1.5),
                    Error);
  }
}

TEST_CASE("compressed mask loss is non-negative and zero only at the target") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> noisy(20), clean(20), mask(20);
    for (int i = 0; i < 20; ++i) {
      noisy[i] = rng.Uniform(0.0, 3.0);
      clean[i] = rng.Uniform(0.0, 3.0);
      mask[i] = rng.Uniform(0.01, 0.99);
    }
    const double l = CompressedMaskLoss(TD::FromValues({4, 5}, mask),
                                        std::span<const double>(noisy),
                                        std::span<const double>(clean))
                         .item();
    CHECK(l > 0.0);
  }
}

TEST_CASE("compressed mask loss gradient") {
  Rng rng(18);
  std::vector<double> noisy(120), clean(120);
  for (int i = 0; i < 120; ++i) {
    noisy[i] = rng.Uniform(0.1, 3.0);
    clean[i] = rng.Uniform(0.0, 3.0);
  }
  TD mask = testing::RandomTensor({10, 12}, rng, 0.05, 0.95);
  const auto r = testing::CheckGradients(
      {mask},
      [&](const std::vector<TD> &v) {
        return CompressedMaskLoss(v[0], std::span<const double>(noisy),
                                  std::span<const double>(clean));
      },
      120, 4);
  CHECK(r.checked == 120);
  CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("permutation invariant loss") {
  Rng rng(19);
  const int n = 80;
  std::vector<double> noisy(n), clean(n), interf(n), ma(n), mb(n);
  for (int i = 0; i < n; ++i) {
    clean[i] = rng.Uniform(0.0, 2.0);
    interf[i] = rng.Uniform(0.0, 2.0);
    noisy[i] = clean[i] + interf[i] + 0.1;
    ma[i] = clean[i] / noisy[i];
    mb[i] = interf[i] / noisy[i];
  }
  auto pit = [&](const std::vector<double> &a, const std::vector<double> &b) {
    return PermutationInvariantLoss(TD::FromValues({8, 10}, a), TD::FromValues({8, 10}, b),
                                    std::span<const double>(noisy),
                                    std::span<const double>(clean),
                                    std::span<const double>(interf))
        .item();
  };
  const double direct = pit(ma, mb), swapped = pit(mb, ma);
  CHECK(direct < 1e-24);
  CHECK(swapped < 1e-24);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.Uniform(0.01, 0.99);
      b[i] = rng.Uniform(0.01, 0.99);
    }
    CHECK(pit(a, b) == pit(b, a));
  }
  SUBCASE("gradient") {
    TD a = testing::RandomTensor({8, 10}, rng, 0.05, 0.95);
    TD b = testing::RandomTensor({8, 10}, rng, 0.05, 0.95);
    const auto r = testing::CheckGradients(
        {a, b},
        [&](const std::vector<TD> &v) {
          return PermutationInvariantLoss(v[0], v[1], std::span<const double>(noisy),
                                          std::span<const double>(clean),
                                          std::span<const double>(interf));
        },
        160, 5);
    CHECK(r.checked == 160);
    CHECK(r.max_rel_error < 1e-5);
  }
  CHECK_THROWS_AS(PermutationInvariantLoss(TD::FromValues({8, 10}, ma),
                                           TD::FromValues({10, 8}, mb),
                                           std::span<const double>(noisy),
                                           std::span<const double>(clean),
                                           std::span<const double>(interf)),
                  Error);
}

TEST_CASE("enhance with injected masks") {
  const auto clean = Utterance(0, 1, 32000);
  const auto interf = Utterance(2, 1, 32000);
  const auto noisy = datagen::MixAudio(clean, interf, 1.0);
  SUBCASE("all ones equals the round trip") {
    const auto out = Enhance(noisy, [](const dsp::MagnitudeSpectrogram &m) {
      return ConstantMask(m.frames, m.bins, 1.0);
    });
    const auto rt = dsp::Istft(dsp::Stft(noisy));
    REQUIRE(out.size() == rt.size());
    for (int64_t i = 0; i < out.size(); ++i) CHECK(out.samples[i] == rt.samples[i]);
  }
  SUBCASE("all zeros is silence") {
    const auto out = Enhance(noisy, [](const dsp::MagnitudeSpectrogram &m) {
      return ConstantMask(m.frames, m.bins, 0.0);
    });
    CHECK(out.size() == dsp::IstftLength(noisy.size()));
    for (double s : out.samples) CHECK(s == 0.0);
  }
  SUBCASE("oracle ratio mask gains at least 5 dB") {
    const auto s = dsp::Magnitude(dsp::Stft(clean));
    const auto i = dsp::Magnitude(dsp::Stft(interf));
    const auto out = Enhance(noisy, [&](const dsp::MagnitudeSpectrogram &) {
      return OracleRatioMask(s, i);
    });
    const double before = eval::Sdr(noisy, clean);
    const double after = eval::Sdr(eval::AlignLength(out, clean.size()), clean);
    CHECK(after - before >= 5.0);
  }
  SUBCASE("mask validation") {
    const auto spec = dsp::Stft(noisy);
    CHECK_THROWS_AS(ApplyMask(spec, ConstantMask(spec.frames - 1, spec.bins, 1.0)), Error);
    CHECK_THROWS_AS(ApplyMask(spec, ConstantMask(spec.frames, spec.bins, -1.0)), Error);
  }
}

TEST_CASE("network enhance matches mask application") {
  VoiceFilterModel m(VoiceFilterConfig::TestScale());
  m.Initialize(6);
  const auto noisy = Utterance(3, 2, 16000);
  const auto d = UnitVector(256, 9);
  const auto a = Enhance(noisy, d, m);
  const auto spec = dsp::Stft(noisy);
  const auto b = ApplyMask(spec, ForwardMask(dsp::Magnitude(spec), d, m));
  CHECK(a.samples == b.samples);
}

TEST_CASE("every first-layer weight receives gradient") {
  VoiceFilterNet<double> m(VoiceFilterConfig::TestScale());
  m.Initialize(7);
  Rng rng(31);
  const int64_t T = 40;
  dsp::MagnitudeSpectrogram nm{T, 257, std::vector<double>(T * 257)}, cm = nm;
  for (int64_t i = 0; i < T * 257; ++i) {
    nm.data[i] = rng.Uniform(0.0, 2.0);
    cm.data[i] = nm.data[i] * rng.Uniform();
  }
  const auto x = dsp::PowerLawCompress(nm, 0.3);
  std::vector<double> d(256);
  for (double &v : d) v = rng.Uniform(-0.1, 0.1);
  const auto mask = m.Forward(TD::FromValues({T, 257}, x.data), TD::FromValues({256}, d));
  m.params().ZeroGrad();
  ad::Backward(CompressedMaskLoss(mask, nm, cm));
  const auto g = m.params().Get("cnn1.kernel").grad();
  REQUIRE(g.size() == 7 * 16);
  // A tap reaches the loss iff it reads a real (non-padding) input at some
  // position where its filter clears the ReLU.
  const auto kv = m.params().Get("cnn1.kernel").values();
  const auto pre =
      testing::NaiveConv2d(x.data, T, 257, 1, std::vector<double>(kv.begin(), kv.end()), 1, 7,
                           16, std::vector<double>(16, 0.0), 1, 1);
  int active = 0;
  for (int o = 0; o < 16; ++o) {
    bool fires = false;
    for (int tap = 0; tap < 7; ++tap) {
      bool reached = false;
      for (int64_t t = 0; t < T; ++t)
        for (int f = 0; f < 257; ++f) {
          const int fs = f + tap - 3;
          if (pre[(t * 257 + f) * 16 + o] > 0.0 && fs >= 0 && fs < 257 &&
              x.data[t * 257 + fs] > 0.0)
            reached = true;
        }
      fires = fires || reached;
      CAPTURE(o);
      CAPTURE(tap);
      CHECK((g[tap * 16 + o] != 0.0) == reached);
    }
    active += fires;
  }
  CHECK(active >= 12);
}

TEST_CASE("voicefilter checkpoint round trip with bundled encoder") {
  testing::TempDir dir("vf_ckpt");
  auto cfg = VoiceFilterConfig::TestScale();
  cfg.lstm_mode = LstmMode::kBi;
  cfg.power = 0.5;
  VoiceFilterModel m(cfg);
  m.Initialize(11);
  encoder::EncoderModel enc(encoder::EncoderConfig{40, 16, 256});
  enc.Initialize(12);
  SaveVoiceFilter(dir / "m.ckpt", m, &enc);
  const auto bundle = LoadVoiceFilter(dir / "m.ckpt");
  CHECK(bundle.model.config().lstm_mode == LstmMode::kBi);
  CHECK(bundle.model.config().power == 0.5);
  CHECK(Values(bundle.model.params()) == Values(m.params()));
  REQUIRE(bundle.encoder.has_value());
  CHECK(bundle.encoder->config().hidden == 16);
  CHECK(EncodeVoiceFilter(bundle.model, &*bundle.encoder) ==
        testing::FileBytes(dir / "m.ckpt"));

  SaveVoiceFilter(dir / "bare.ckpt", m, nullptr);
  CHECK_FALSE(LoadVoiceFilter(dir / "bare.ckpt").encoder.has_value());
  SaveEncoder(dir / "enc.ckpt", enc);
  CHECK_THROWS_AS(LoadVoiceFilter(dir / "enc.ckpt"), Error);
}

TEST_CASE("pit variant emits two masks and no d-vector input") {
  auto cfg = VoiceFilterConfig::TestScale();
  cfg.permutation_invariant = true;
  cfg.lstm_mode = LstmMode::kBi;
  VoiceFilterModel m(cfg);
  m.Initialize(2);
  CHECK(cfg.lstm_input_dim() == 8 * 257);
  CHECK(m.layers().back().units == 2 * 257);
  const auto mag = dsp::Magnitude(dsp::Stft(Utterance(0, 0, 8000)));
  const auto [a, b] = ForwardMaskPair(mag, m);
  CHECK(a.frames == mag.frames);
  CHECK(b.bins == 257);
  CHECK(a.data != b.data);
}

TEST_CASE("voicefilter training contracts") {
  testing::TempDir dir("vf_train");
  const auto manifest = testing::SmallCorpus(dir / "corpus");
  const auto triplets = datagen::SampleTriplets(manifest, 4, 3);
  DvectorTable dv;
  for (const auto &t : triplets) dv[t.reference_id] = UnitVector(8, t.reference_id.size() % 8);
  VoiceFilterTrainConfig cfg;
  cfg.model = TinyConfig();
  cfg.steps = 3;
  cfg.batch_size = 2;
  cfg.seed = 9;
  cfg.segment_samples = 8000;

  SUBCASE("zero learning rate keeps the initialization") {
    cfg.adam.lr = 0.0;
    const auto trained = TrainVoiceFilter(manifest, triplets, dv, cfg);
    VoiceFilterModel init(cfg.model);
    init.Initialize(cfg.seed);
    CHECK(Values(trained.params()) == Values(init.params()));
  }
  SUBCASE("fixed seed gives identical checkpoints") {
    std::vector<ad::TrainStepReport> reports;
    TrainVoiceFilter(manifest, triplets, dv, cfg,
                     [&](const ad::TrainStepReport &r) { reports.push_back(r); }, dir / "a.ckpt");
    TrainVoiceFilter(manifest, triplets, dv, cfg, {}, dir / "b.ckpt");
    REQUIRE(reports.size() == 3);
    for (size_t i = 0; i < reports.size(); ++i) {
      CHECK(reports[i].step == static_cast<int64_t>(i + 1));
      CHECK(std::isfinite(reports[i].loss));
      CHECK(std::isfinite(reports[i].grad_norm));
    }
    CHECK(testing::FileBytes(dir / "a.ckpt") == testing::FileBytes(dir / "b.ckpt"));
    cfg.seed = 10;
    TrainVoiceFilter(manifest, triplets, dv, cfg, {}, dir / "c.ckpt");
    CHECK(testing::FileBytes(dir / "a.ckpt") != testing::FileBytes(dir / "c.ckpt"));
  }
  SUBCASE("runaway learning rate aborts") {
    cfg.adam.lr = 1e30;
    cfg.steps = 20;
    cfg.clip_grad_norm = 0.0;
    try {
      TrainVoiceFilter(manifest, triplets, dv, cfg);
      FAIL("training did not diverge");
    } catch (const Error &e) {
      CHECK(e.kind() == Error::Kind::kDiverged);
      CHECK(std::string(e.what()).find("diverged") != std::string::npos);
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(TrainVoiceFilter(manifest, {}, dv, cfg), Error);
    CHECK_THROWS_AS(TrainVoiceFilter(manifest, triplets, DvectorTable{}, cfg), Error);
    auto bad = triplets;
    bad[0].reference_id = bad[0].clean_id;
    CHECK_THROWS_AS(TrainVoiceFilter(manifest, bad, dv, cfg), Error);
  }
}
