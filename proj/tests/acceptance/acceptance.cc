// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Acceptance run. Prints one PASS/FAIL line per criterion, followed by the
// supporting training contracts, and exits non-zero if any gating line
// fails. Criterion 7 is report-only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "autodiff/ops.h"
#include "common/io.h"
#include "common/rng.h"
#include "datagen/manifest.h"
#include "datagen/synth.h"
#include "datagen/triplet.h"
#include "dsp/stft.h"
#include "encoder/encoder.h"
#include "encoder/ge2e.h"
#include "encoder/train_encoder.h"
#include "eval/evaluate.h"
#include "eval/sdr.h"
#include "support/fixtures.h"
#include "support/gradcheck.h"
#include "voicefilter/enhance.h"
#include "voicefilter/loss.h"
#include "voicefilter/model.h"
#include "voicefilter/train.h"

namespace fs = std::filesystem;
using namespace vfkit;
using TD = ad::Tensor<double>;
using Inputs = std::vector<TD>;
using testing::CheckGradients;
using testing::RandomTensor;

namespace {

int g_failures = 0;

void Report(const std::string &id, const std::string &name, bool pass,
            const std::string &detail, bool gating = true) {
  std::printf("%s [%s] %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass && gating) ++g_failures;
}

std::string Fmt(const char *fmt, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

double Median(std::vector<double> v) { return eval::Aggregate(v).median; }

double MeanOf(const std::vector<double> &v, size_t begin, size_t end) {
  double s = 0.0;
  for (size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

TD Probe(const TD &y, uint64_t seed = 99) {
  return ad::WeightedSum(y, testing::Projection(y.numel(), seed));
}

TD AwayFromZero(ad::Shape shape, Rng &rng, double gap = 0.05) {
  TD t = RandomTensor(shape, rng);
  for (double &v : t.mutable_values()) v = v < 0 ? v - gap : v + gap;
  return t;
}

// ---- 1 ----------------------------------------------------------------------

void GradientSuite() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  struct Case {
    std::string name;
    Inputs in;
    std::function<TD(const Inputs &)> f;
  };
  std::vector<Case> cases;
  for (int dt : {1, 2, 4, 8, 16}) {
    cases.push_back({"conv2d dilation " + std::to_string(dt),
                     {RandomTensor({40, 7, 2}, rng), RandomTensor({5, 5, 2, 3}, rng),
                      RandomTensor({3}, rng)},
                     [dt](const Inputs &v) {
                       return Probe(ad::Conv2d(v[0], v[1], v[2], dt, 1));
                     }});
  }
  const int T = 6, D = 4, H = 5;
  for (bool bi : {false, true}) {
    cases.push_back({bi ? "bi-lstm" : "uni-lstm",
                     {RandomTensor({2, T, D}, rng), RandomTensor({D, 4 * H}, rng),
                      RandomTensor({H, 4 * H}, rng), RandomTensor({4 * H}, rng),
                      RandomTensor({D, 4 * H}, rng), RandomTensor({H, 4 * H}, rng),
                      RandomTensor({4 * H}, rng)},
                     [bi](const Inputs &v) {
                       ad::LstmWeights<double> f{v[1], v[2], v[3]}, b{v[4], v[5], v[6]};
                       return Probe(ad::LstmLayer(v[0], f, bi ? &b : nullptr));
                     }});
  }
  cases.push_back({"fc",
                   {RandomTensor({9, 8}, rng), RandomTensor({8, 7}, rng), RandomTensor({7}, rng)},
                   [](const Inputs &v) {
                     return Probe(ad::FullyConnected(v[0], v[1], v[2], ad::Activation::kNone));
                   }});
  cases.push_back({"sigmoid", {RandomTensor({12, 12}, rng, -4, 4)},
                   [](const Inputs &v) { return Probe(ad::Sigmoid(v[0])); }});
  cases.push_back({"relu", {AwayFromZero({12, 12}, rng)},
                   [](const Inputs &v) { return Probe(ad::Relu(v[0])); }});

  // Loss inputs: magnitudes of a random two-source mixture.
  const int n = 12 * 14;
  auto clean = std::make_shared<std::vector<double>>(n);
  auto interf = std::make_shared<std::vector<double>>(n);
  auto noisy = std::make_shared<std::vector<double>>(n);
  for (int i = 0; i < n; ++i) {
    (*clean)[i] = rng.Uniform(0.0, 2.0);
    (*interf)[i] = rng.Uniform(0.0, 2.0);
    (*noisy)[i] = (*clean)[i] + (*interf)[i] + 0.1;
  }
  cases.push_back({"vf_loss", {RandomTensor({12, 14}, rng, 0.05, 0.95)},
                   [=](const Inputs &v) {
                     return voicefilter::CompressedMaskLoss(
                         v[0], std::span<const double>(*noisy), std::span<const double>(*clean));
                   }});
  cases.push_back({"pit_loss",
                   {RandomTensor({12, 14}, rng, 0.05, 0.95), RandomTensor({12, 14}, rng, 0.05, 0.95)},
                   [=](const Inputs &v) {
                     return voicefilter::PermutationInvariantLoss(
                         v[0], v[1], std::span<const double>(*noisy),
                         std::span<const double>(*clean), std::span<const double>(*interf));
                   }});
  cases.push_back({"ge2e_style_loss",
                   {RandomTensor({12, 10}, rng), TD::Scalar(2.5, true), TD::Scalar(-0.7, true)},
                   [](const Inputs &v) {
                     return encoder::Ge2eLoss(v[0], 4, 3, v[1], v[2]);
                   }});

  double worst = 0.0;
  int min_checked = 1 << 30;
  std::string worst_name;
  for (auto &c : cases) {
    const auto r = CheckGradients(c.in, c.f, 150, 7);
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_name = c.name;
    }
    min_checked = std::min(min_checked, r.checked);
  }
  const double secs = Seconds(start);
  Report("1", "gradient suite",
         worst < 1e-5 && min_checked >= 100 && secs < 120.0,
         Fmt("%.0f ops, worst rel err %.2e", cases.size(), worst) + " (" + worst_name + ")" +
             Fmt(", min %.0f coords/op, %.1f s", min_checked, secs));
}

// ---- 2 ----------------------------------------------------------------------

void StftRoundTrip() {
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    Rng rng(200 + s);
    dsp::AudioBuffer x;
    x.samples.resize(3 * dsp::kSampleRate);
    for (double &v : x.samples) v = rng.Uniform(-0.5, 0.5);
    const auto y = dsp::Istft(dsp::Stft(x));
    double err = 0.0, ref = 0.0;
    for (int64_t i = 512; i < y.size() - 512; ++i) {
      err += (y.samples[i] - x.samples[i]) * (y.samples[i] - x.samples[i]);
      ref += x.samples[i] * x.samples[i];
    }
    worst = std::max(worst, std::sqrt(err / ref));
  }
  Report("2", "stft round trip", worst < 1e-6,
         Fmt("worst interior relative RMS error %.2e over 10 signals", worst));
}

// ---- 3 ----------------------------------------------------------------------

void Architecture() {
  using voicefilter::kConvGeometry;
  voicefilter::VoiceFilterModel m;
  const auto layers = m.layers();
  const int widths[8][2] = {{1, 7}, {7, 1}, {5, 5}, {5, 5}, {5, 5}, {5, 5}, {5, 5}, {1, 1}};
  const int dil[8] = {1, 1, 1, 2, 4, 8, 16, 1};
  bool ok = layers.size() == 11;
  for (int i = 0; ok && i < 8; ++i) {
    ok = layers[i].kind == ad::LayerKind::kConv2d && layers[i].width_time == widths[i][0] &&
         layers[i].width_freq == widths[i][1] && layers[i].dilation_time == dil[i] &&
         layers[i].dilation_freq == 1 && layers[i].units == (i < 7 ? 64 : 8) &&
         kConvGeometry[i].width_time == widths[i][0] &&
         kConvGeometry[i].width_freq == widths[i][1] &&
         kConvGeometry[i].dilation_time == dil[i];
  }
  ok = ok && layers[8].kind == ad::LayerKind::kLstm && layers[8].units == 400 &&
       layers[9].units == 600 && layers[10].units == 257 &&
       m.params().Get("fc1.weight").shape() == ad::Shape{400, 600} &&
       m.params().Get("fc2.weight").shape() == ad::Shape{600, 257};

  // Zero parameters: exactly one half everywhere.
  Rng rng(31);
  dsp::AudioBuffer a;
  a.samples.resize(dsp::kSampleRate);
  for (double &v : a.samples) v = rng.Uniform(-0.5, 0.5);
  const auto mag = dsp::Magnitude(dsp::Stft(a));
  encoder::SpeakerEmbedding d;
  d.values.assign(256, 1.0 / 16.0);
  const auto zero_mask = voicefilter::ForwardMask(mag, d, m);
  bool half = zero_mask.frames == mag.frames && zero_mask.bins == 257;
  for (double v : zero_mask.data) half = half && v == 0.5;

  m.Initialize(32);
  const auto mask = voicefilter::ForwardMask(mag, d, m);
  bool range = mask.frames == mag.frames && mask.bins == 257;
  for (double v : mask.data) range = range && v > 0.0 && v < 1.0;
  Report("3", "architecture conformance", ok && half && range,
         std::string("layer table ") + (ok ? "ok" : "mismatch") + ", zero-init mask " +
             (half ? "0.5" : "not 0.5") + ", initialized mask " +
             Fmt("%.0fx%.0f ", mask.frames, mask.bins) + (range ? "in (0,1)" : "out of range"));
}

// ---- 4 ----------------------------------------------------------------------

void PitSymmetry() {
  Rng rng(41);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int t = 3 + static_cast<int>(rng.Below(10)), f = 5 + static_cast<int>(rng.Below(20));
    const int n = t * f;
    std::vector<double> noisy(n), clean(n), interf(n), a(n), b(n);
    for (int i = 0; i < n; ++i) {
      clean[i] = rng.Uniform(0.0, 2.0);
      interf[i] = rng.Uniform(0.0, 2.0);
      noisy[i] = clean[i] + interf[i] + rng.Uniform(0.0, 0.5);
      a[i] = rng.Uniform(0.001, 0.999);
      b[i] = rng.Uniform(0.001, 0.999);
    }
    auto loss = [&](const std::vector<double> &x, const std::vector<double> &y) {
      return voicefilter::PermutationInvariantLoss(
                 TD::FromValues({t, f}, x), TD::FromValues({t, f}, y),
                 std::span<const double>(noisy), std::span<const double>(clean),
                 std::span<const double>(interf))
          .item();
    };
    if (loss(a, b) == loss(b, a)) ++exact;
  }
  Report("4", "pit symmetry", exact == 100, Fmt("%.0f/100 bit-exact", exact));
}

// ---- 5 ----------------------------------------------------------------------

struct OracleRun {
  double median_gain = 0.0;
  std::string bytes;  // CSV + JSON report
};

OracleRun RunOracle(const fs::path &dir) {
  datagen::SynthOptions o;
  o.n_speakers = 6;
  o.utts_per_speaker = 6;
  o.seed = 51;
  const auto manifest = datagen::SynthToyCorpus(o, dir);
  const auto triplets = datagen::SampleTriplets(manifest, 20, 52);
  const auto report = eval::Evaluate(manifest, triplets, eval::OracleMaskFactory());
  std::vector<double> gains;
  for (const auto &r : report.rows) gains.push_back(r.sdr_enhanced_db - r.sdr_noisy_db);
  return {Median(gains), eval::EncodeReportCsv(report) + eval::EncodeReportJson(report)};
}

// ---- 6, 7, 9 ----------------------------------------------------------------

constexpr int kTrailing = 100;

struct ToyCorpus {
  datagen::CorpusManifest train, test;
  std::vector<datagen::TrainingTriplet> train_triplets, test_triplets;
};

ToyCorpus MakeToyCorpus(const fs::path &dir) {
  datagen::SynthOptions o;
  o.n_speakers = 8;
  o.utts_per_speaker = 10;
  o.seed = 11;
  o.test_speakers = 2;
  datagen::SynthToyCorpus(o, dir);
  ToyCorpus c;
  c.train = datagen::ReadManifest(dir / "train.jsonl");
  c.test = datagen::ReadManifest(dir / "test.jsonl");
  c.train_triplets = datagen::SampleTriplets(c.train, 200, 13);
  c.test_triplets = datagen::SampleTriplets(c.test, 50, 14);
  return c;
}

struct EncoderRun {
  encoder::EncoderModel model;
  std::vector<double> losses;
  std::string bytes;
};

EncoderRun TrainToyEncoder(const ToyCorpus &c, const fs::path &dir) {
  encoder::EncoderTrainConfig cfg;
  cfg.steps = 500;
  cfg.seed = 12;
  std::vector<double> losses;
  const fs::path out = dir / "encoder.ckpt";
  auto model = encoder::TrainEncoder(
      c.train, cfg, [&](const ad::TrainStepReport &r) { losses.push_back(r.loss); }, out);
  return {std::move(model), std::move(losses), ReadFileBytes(out)};
}

struct VoiceFilterRun {
  std::vector<double> losses;
  eval::SdrReport report;
  std::string checkpoint_bytes, report_bytes;
  double seconds = 0.0;
};

VoiceFilterRun TrainToyVoiceFilter(const ToyCorpus &c, const encoder::EncoderModel &enc,
                                   voicefilter::LstmMode mode, const fs::path &dir) {
  const auto start = std::chrono::steady_clock::now();
  voicefilter::VoiceFilterTrainConfig cfg;
  cfg.model = voicefilter::VoiceFilterConfig::TestScale();
  cfg.model.lstm_mode = mode;
  cfg.steps = 2000;
  cfg.batch_size = 1;
  cfg.seed = 15;
  VoiceFilterRun run;
  const auto dvectors = voicefilter::ComputeDvectors(c.train, c.train_triplets, enc);
  const fs::path out = dir / (std::string("vf_") + voicefilter::LstmModeName(mode) + ".ckpt");
  const auto model = voicefilter::TrainVoiceFilter(
      c.train, c.train_triplets, dvectors, cfg,
      [&](const ad::TrainStepReport &r) { run.losses.push_back(r.loss); }, out, &enc);
  run.checkpoint_bytes = ReadFileBytes(out);
  run.report = eval::Evaluate(c.test, c.test_triplets, eval::NetworkMaskFactory(model, enc));
  run.report_bytes = eval::EncodeReportCsv(run.report) + eval::EncodeReportJson(run.report);
  run.seconds = Seconds(start);
  return run;
}

double MedianGain(const eval::SdrReport &r) { return r.enhanced.median - r.noisy.median; }

// Mean cosine similarity of d-vectors within and across speakers.
std::pair<double, double> SpeakerSimilarity(const datagen::CorpusManifest &m,
                                            const encoder::EncoderModel &enc) {
  std::vector<std::vector<double>> dv;
  for (const auto &r : m.records)
    dv.push_back(encoder::DVector(datagen::LoadUtterance(m, r.utterance_id), enc).values);
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (size_t i = 0; i < dv.size(); ++i)
    for (size_t j = i + 1; j < dv.size(); ++j) {
      double dot = 0;
      for (size_t k = 0; k < dv[i].size(); ++k) dot += dv[i][k] * dv[j][k];
      if (m.records[i].speaker_id == m.records[j].speaker_id) {
        intra += dot;
        ++ni;
      } else {
        inter += dot;
        ++nx;
      }
    }
  return {intra / ni, inter / nx};
}

// ---- 8 ----------------------------------------------------------------------

void DvectorContracts() {
  encoder::EncoderModel enc;
  enc.Initialize(81);
  const auto speakers = datagen::MakeToySpeakers(3, 82);
  double worst_norm = 0.0, worst_gain = 0.0;
  for (int s = 0; s < 3; ++s) {
    const auto x = datagen::SynthesizeUtterance(speakers[s], 82, 0);
    const auto d = encoder::DVector(x, enc).values;
    double nrm = 0;
    for (double v : d) nrm += v * v;
    worst_norm = std::max(worst_norm, std::abs(std::sqrt(nrm) - 1.0));
    for (double g : {0.5, 2.0}) {
      auto y = x;
      for (double &v : y.samples) v *= g;
      const auto e = encoder::DVector(y, enc).values;
      double dot = 0;
      for (size_t k = 0; k < d.size(); ++k) dot += d[k] * e[k];
      worst_gain = std::max(worst_gain, 1.0 - dot);
    }
  }
  bool slices = true;
  const int expected[4] = {1, 1, 2, 4};
  const int lengths[4] = {100, 160, 240, 400};
  for (int i = 0; i < 4; ++i) {
    dsp::FeatureMatrix f;
    f.rows = lengths[i];
    f.cols = 40;
    f.data.assign(static_cast<size_t>(f.rows) * f.cols, 0.0);
    slices = slices && static_cast<int>(encoder::WindowSlices(f).size()) == expected[i];
  }
  Report("8", "d-vector contracts", worst_norm < 1e-6 && worst_gain < 1e-6 && slices,
         Fmt("norm err %.1e, gain 1-cos %.1e, ", worst_norm, worst_gain) +
             "slice counts " + (slices ? "1/1/2/4" : "wrong"));
}

// ---- training contract: 200 steps, batch 4 ----------------------------------

void ShortTrainingContract(const ToyCorpus &c, const encoder::EncoderModel &enc) {
  voicefilter::VoiceFilterTrainConfig cfg;
  cfg.model = voicefilter::VoiceFilterConfig::TestScale();
  cfg.steps = 200;
  cfg.batch_size = 4;
  cfg.seed = 16;
  std::vector<double> losses;
  const auto dvectors = voicefilter::ComputeDvectors(c.train, c.train_triplets, enc);
  voicefilter::TrainVoiceFilter(c.train, c.train_triplets, dvectors, cfg,
                                [&](const ad::TrainStepReport &r) { losses.push_back(r.loss); });
  const double first = MeanOf(losses, 0, 20), last = MeanOf(losses, losses.size() - 20, losses.size());
  Report("vf-train-200", "200-step batch-4 loss halves", last < 0.5 * first,
         Fmt("trailing-20 mean %.4f -> %.4f (ratio %.3f)", first, last, last / first));
}

}  // namespace

int main() {
  const auto total = std::chrono::steady_clock::now();
  try {
    GradientSuite();
    StftRoundTrip();
    Architecture();
    PitSymmetry();

    testing::TempDir tmp("acceptance");
    const auto t5 = std::chrono::steady_clock::now();
    const OracleRun o1 = RunOracle(tmp / "oracle_a");
    const double s5 = Seconds(t5);
    Report("5", "oracle-mask SDR", o1.median_gain >= 5.0 && s5 < 60.0,
           Fmt("median gain %.2f dB over 20 mixtures, %.1f s", o1.median_gain, s5));

    const ToyCorpus c1 = MakeToyCorpus(tmp / "toy_a");
    const EncoderRun e1 = TrainToyEncoder(c1, tmp / "toy_a");
    const VoiceFilterRun v1 =
        TrainToyVoiceFilter(c1, e1.model, voicefilter::LstmMode::kUni, tmp / "toy_a");
    const double gain = MedianGain(v1.report);
    const double l0 = MeanOf(v1.losses, 0, kTrailing);
    const double l1 = MeanOf(v1.losses, v1.losses.size() - kTrailing, v1.losses.size());
    Report("6", "toy end-to-end", gain >= 3.0 && l1 < 0.5 * l0,
           Fmt("median SDR noisy %.2f -> enhanced %.2f dB (gain %+.2f); ", v1.report.noisy.median,
               v1.report.enhanced.median, gain) +
               Fmt("trailing-100 loss %.4f -> %.4f (ratio %.3f); vf %.0f s", l0, l1, l1 / l0,
                   v1.seconds));

    const VoiceFilterRun vbi =
        TrainToyVoiceFilter(c1, e1.model, voicefilter::LstmMode::kBi, tmp / "toy_a");
    const VoiceFilterRun vnone =
        TrainToyVoiceFilter(c1, e1.model, voicefilter::LstmMode::kNone, tmp / "toy_a");
    const double mb = vbi.report.enhanced.median, mu = v1.report.enhanced.median,
                 mn = vnone.report.enhanced.median;
    const bool ordered = mb >= mu && mu >= mn;
    Report("7", "trend check (report-only)", true,
           Fmt("median enhanced SDR bi %.2f, uni %.2f, none %.2f dB; ", mb, mu, mn) +
               (ordered ? "ordering bi >= uni >= none holds" : "ordering bi >= uni >= none does not hold"),
           false);

    DvectorContracts();

    const OracleRun o2 = RunOracle(tmp / "oracle_b");
    const ToyCorpus c2 = MakeToyCorpus(tmp / "toy_b");
    const EncoderRun e2 = TrainToyEncoder(c2, tmp / "toy_b");
    const VoiceFilterRun v2 =
        TrainToyVoiceFilter(c2, e2.model, voicefilter::LstmMode::kUni, tmp / "toy_b");
    const bool same_corpus = ReadFileBytes(tmp / "toy_a" / "manifest.jsonl") ==
                             ReadFileBytes(tmp / "toy_b" / "manifest.jsonl");
    const bool det = o1.bytes == o2.bytes && same_corpus && e1.bytes == e2.bytes &&
                     v1.checkpoint_bytes == v2.checkpoint_bytes &&
                     v1.report_bytes == v2.report_bytes;
    Report("9", "determinism", det,
           std::string("oracle report ") + (o1.bytes == o2.bytes ? "same" : "differs") +
               ", encoder ckpt " + (e1.bytes == e2.bytes ? "same" : "differs") +
               ", voicefilter ckpt " +
               (v1.checkpoint_bytes == v2.checkpoint_bytes ? "same" : "differs") +
               ", eval report " + (v1.report_bytes == v2.report_bytes ? "same" : "differs"));

    // Supporting training contracts on the criterion-6 corpus and encoder.
    const auto [intra, inter] = SpeakerSimilarity(c1.train, e1.model);
    Report("encoder-gap", "intra minus inter speaker cosine >= 0.2", intra - inter >= 0.2,
           Fmt("intra %.3f, inter %.3f, gap %.3f", intra, inter, intra - inter));
    const double g0 = MeanOf(e1.losses, 0, kTrailing);
    const double g1 = MeanOf(e1.losses, e1.losses.size() - kTrailing, e1.losses.size());
    Report("encoder-loss", "ge2e trailing-100 mean decreases", g1 < g0,
           Fmt("%.4f -> %.4f", g0, g1));
    ShortTrainingContract(c1, e1.model);
  } catch (const std::exception &e) {
    Report("run", "acceptance harness", false, std::string("aborted: ") + e.what());
  }
  std::printf("acceptance: %d gating failure(s), %.0f s total\n", g_failures, Seconds(total));
  return g_failures == 0 ? 0 : 1;
}
