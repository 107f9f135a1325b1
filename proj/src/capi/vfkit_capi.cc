// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "vfkit/vfkit.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "autodiff/checkpoint.h"
#include "common/io.h"
#include "datagen/manifest.h"
#include "datagen/synth.h"
#include "datagen/triplet.h"
#include "dsp/stft.h"
#include "dsp/wav.h"
#include "encoder/encoder.h"
#include "encoder/train_encoder.h"
#include "eval/evaluate.h"
#include "eval/sdr.h"
#include "voicefilter/enhance.h"
#include "voicefilter/model.h"
#include "voicefilter/train.h"

struct vfkit_encoder {
  vfkit::encoder::EncoderModel model;
};

struct vfkit_voicefilter {
  vfkit::voicefilter::VoiceFilterModel model;
  std::unique_ptr<vfkit_encoder> encoder;
};

namespace {

using vfkit::Error;

thread_local std::string g_last_error;

vfkit_status Fail(vfkit_status status, const std::string &message) {
  g_last_error = message;
  return status;
}

vfkit_status StatusOf(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::kInvalidArgument: return VFKIT_ERR_INVALID_ARGUMENT;
    case Error::Kind::kIo: return VFKIT_ERR_IO;
    case Error::Kind::kFormat: return VFKIT_ERR_FORMAT;
    case Error::Kind::kDiverged: return VFKIT_ERR_DIVERGED;
  }
  return VFKIT_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes.
template <typename F>
vfkit_status Guard(F &&body) {
  try {
    body();
    g_last_error.clear();
    return VFKIT_OK;
  } catch (const Error &e) {
    return Fail(StatusOf(e.kind()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(VFKIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return Fail(VFKIT_ERR_INTERNAL, e.what());
  }
}

void Require(bool ok, const char *what) {
  if (!ok) vfkit::ThrowInvalid(what);
}

std::string Str(const char *s, const char *what) {
  Require(s != nullptr && *s != '\0', what);
  return s;
}

vfkit::ad::ProgressCallback Progress(vfkit_progress_fn fn, void *user) {
  if (!fn) return {};
  return [fn, user](const vfkit::ad::TrainStepReport &r) {
    fn(r.step, r.loss, r.grad_norm, user);
  };
}

const vfkit::encoder::EncoderModel &PickEncoder(const vfkit_voicefilter *model,
                                                const vfkit_encoder *encoder) {
  if (encoder) return encoder->model;
  if (model->encoder) return model->encoder->model;
  vfkit::ThrowInvalid("no encoder: the model checkpoint has none and none was given");
}

void FillSummary(const vfkit::eval::SdrReport &r, vfkit_eval_summary *s) {
  if (!s) return;
  s->count = static_cast<int64_t>(r.rows.size());
  s->skipped = r.skipped;
  s->noisy_mean_db = r.noisy.mean;
  s->noisy_median_db = r.noisy.median;
  s->enhanced_mean_db = r.enhanced.mean;
  s->enhanced_median_db = r.enhanced.median;
}

}  // namespace

extern "C" {

const char *vfkit_last_error(void) { return g_last_error.c_str(); }

const char *vfkit_status_name(vfkit_status status) {
  switch (status) {
    case VFKIT_OK: return "ok";
    case VFKIT_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case VFKIT_ERR_IO: return "io";
    case VFKIT_ERR_FORMAT: return "format";
    case VFKIT_ERR_DIVERGED: return "diverged";
    case VFKIT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *vfkit_version(void) { return "0.1.0"; }

int vfkit_checkpoint_format_version(void) { return vfkit::ad::kCheckpointFormatVersion; }

void vfkit_synth_options_init(vfkit_synth_options *o) {
  if (!o) return;
  const vfkit::datagen::SynthOptions d;
  o->n_speakers = d.n_speakers;
  o->utts_per_speaker = d.utts_per_speaker;
  o->seed = d.seed;
  o->test_speakers = d.test_speakers;
}

vfkit_status vfkit_synth_corpus(const vfkit_synth_options *o, const char *out_dir) {
  return Guard([&] {
    Require(o != nullptr, "options must not be NULL");
    vfkit::datagen::SynthOptions opt;
    opt.n_speakers = o->n_speakers;
    opt.utts_per_speaker = o->utts_per_speaker;
    opt.seed = o->seed;
    opt.test_speakers = o->test_speakers;
    vfkit::datagen::SynthToyCorpus(opt, Str(out_dir, "output directory required"));
  });
}

vfkit_status vfkit_mix_triplets(const char *manifest_path, int64_t n, uint64_t seed,
                                const char *weight_mode, const char *out_path) {
  return Guard([&] {
    const auto manifest =
        vfkit::datagen::ReadManifest(Str(manifest_path, "manifest path required"));
    const auto mode = vfkit::datagen::ParseWeightMode(weight_mode ? weight_mode : "fixed");
    const std::string out = Str(out_path, "output path required");
    vfkit::datagen::WriteTriplets(out,
                                  vfkit::datagen::SampleTriplets(manifest, n, seed, mode));
  });
}

void vfkit_encoder_train_options_init(vfkit_encoder_train_options *o) {
  if (!o) return;
  const vfkit::encoder::EncoderTrainConfig d;
  o->steps = d.steps;
  o->seed = d.seed;
  o->speakers_per_batch = d.speakers_per_batch;
  o->utterances_per_speaker = d.utterances_per_speaker;
  o->learning_rate = d.adam.lr;
  o->clip_grad_norm = d.clip_grad_norm;
  o->hidden = d.model.hidden;
  o->checkpoint_every = d.checkpoint_every;
}

vfkit_status vfkit_encoder_train(const char *manifest_path,
                                 const vfkit_encoder_train_options *o,
                                 vfkit_progress_fn progress, void *user_data,
                                 const char *out_path, vfkit_encoder **out) {
  if (out) *out = nullptr;
  return Guard([&] {
    Require(o != nullptr, "options must not be NULL");
    const auto manifest =
        vfkit::datagen::ReadManifest(Str(manifest_path, "manifest path required"));
    vfkit::encoder::EncoderTrainConfig cfg;
    cfg.steps = o->steps;
    cfg.seed = o->seed;
    cfg.speakers_per_batch = o->speakers_per_batch;
    cfg.utterances_per_speaker = o->utterances_per_speaker;
    cfg.adam.lr = o->learning_rate;
    cfg.clip_grad_norm = o->clip_grad_norm;
    cfg.model.hidden = o->hidden;
    cfg.checkpoint_every = o->checkpoint_every;
    std::optional<std::filesystem::path> path;
    if (out_path && *out_path) path = out_path;
    auto model = vfkit::encoder::TrainEncoder(manifest, cfg, Progress(progress, user_data),
                                              path);
    if (out) *out = new vfkit_encoder{std::move(model)};
  });
}

vfkit_status vfkit_encoder_load(const char *path, vfkit_encoder **out) {
  if (out) *out = nullptr;
  return Guard([&] {
    Require(out != nullptr, "output handle must not be NULL");
    *out = new vfkit_encoder{vfkit::encoder::LoadEncoder(Str(path, "path required"))};
  });
}

void vfkit_encoder_free(vfkit_encoder *encoder) { delete encoder; }

int vfkit_encoder_embedding_dim(const vfkit_encoder *encoder) {
  return encoder ? encoder->model.config().embedding_dim : 0;
}

vfkit_status vfkit_encoder_dvector(const vfkit_encoder *encoder, const double *samples,
                                   int64_t n_samples, double *out, int64_t out_len) {
  return Guard([&] {
    Require(encoder != nullptr, "encoder must not be NULL");
    Require(samples != nullptr || n_samples == 0, "samples must not be NULL");
    Require(out != nullptr && out_len == encoder->model.config().embedding_dim,
            "output buffer must hold embedding_dim values");
    vfkit::dsp::AudioBuffer audio;
    audio.samples.assign(samples, samples + n_samples);
    vfkit::dsp::ValidateAudio(audio);
    const auto d = vfkit::encoder::DVector(audio, encoder->model);
    std::copy(d.values.begin(), d.values.end(), out);
  });
}

void vfkit_train_options_init(vfkit_train_options *o) {
  if (!o) return;
  const vfkit::voicefilter::VoiceFilterTrainConfig d;
  o->steps = d.steps;
  o->seed = d.seed;
  o->batch_size = d.batch_size;
  o->learning_rate = d.adam.lr;
  o->clip_grad_norm = d.clip_grad_norm;
  o->lstm_mode = "uni";
  o->scale = "default";
  o->power = d.model.power;
  o->permutation_invariant = 0;
  o->checkpoint_every = d.checkpoint_every;
  o->frame_norm = d.model.frame_norm ? 1 : 0;
}

vfkit_status vfkit_voicefilter_train(const char *manifest_path, const char *triplets_path,
                                     const vfkit_encoder *encoder,
                                     const vfkit_train_options *o,
                                     vfkit_progress_fn progress, void *user_data,
                                     const char *out_path) {
  return Guard([&] {
    Require(o != nullptr, "options must not be NULL");
    Require(encoder != nullptr, "encoder must not be NULL");
    const auto manifest =
        vfkit::datagen::ReadManifest(Str(manifest_path, "manifest path required"));
    const auto triplets =
        vfkit::datagen::ReadTriplets(Str(triplets_path, "triplets path required"));
    const std::string out = Str(out_path, "output path required");
    vfkit::voicefilter::VoiceFilterTrainConfig cfg;
    const std::string scale = o->scale ? o->scale : "default";
    if (scale == "test")
      cfg.model = vfkit::voicefilter::VoiceFilterConfig::TestScale();
    else if (scale != "default")
      vfkit::ThrowInvalid("unknown model scale '" + scale + "' (expected default or test)");
    cfg.model.lstm_mode = vfkit::voicefilter::ParseLstmMode(o->lstm_mode ? o->lstm_mode : "uni");
    cfg.model.power = o->power;
    cfg.model.permutation_invariant = o->permutation_invariant != 0;
    cfg.model.frame_norm = o->frame_norm != 0;
    cfg.model.dvector_dim = encoder->model.config().embedding_dim;
    cfg.steps = o->steps;
    cfg.seed = o->seed;
    cfg.batch_size = o->batch_size;
    cfg.adam.lr = o->learning_rate;
    cfg.clip_grad_norm = o->clip_grad_norm;
    cfg.checkpoint_every = o->checkpoint_every;
    vfkit::voicefilter::DvectorTable dvectors;
    if (!cfg.model.permutation_invariant)
      dvectors = vfkit::voicefilter::ComputeDvectors(manifest, triplets, encoder->model);
    else
      for (const auto &t : triplets) dvectors[t.reference_id] = {};
    vfkit::voicefilter::TrainVoiceFilter(manifest, triplets, dvectors, cfg,
                                         Progress(progress, user_data), out,
                                         &encoder->model);
  });
}

vfkit_status vfkit_voicefilter_load(const char *path, vfkit_voicefilter **out) {
  if (out) *out = nullptr;
  return Guard([&] {
    Require(out != nullptr, "output handle must not be NULL");
    auto bundle = vfkit::voicefilter::LoadVoiceFilter(Str(path, "path required"));
    auto handle = std::make_unique<vfkit_voicefilter>(
        vfkit_voicefilter{std::move(bundle.model), nullptr});
    if (bundle.encoder)
      handle->encoder = std::make_unique<vfkit_encoder>(
          vfkit_encoder{std::move(*bundle.encoder)});
    *out = handle.release();
  });
}

void vfkit_voicefilter_free(vfkit_voicefilter *model) { delete model; }

const vfkit_encoder *vfkit_voicefilter_encoder(const vfkit_voicefilter *model) {
  return model ? model->encoder.get() : nullptr;
}

int vfkit_voicefilter_bins(const vfkit_voicefilter *model) {
  return model ? model->model.config().bins : 0;
}

vfkit_status vfkit_voicefilter_mask(const vfkit_voicefilter *model, const double *noisy,
                                    int64_t n_noisy, const double *dvector,
                                    int64_t dvector_len, double *out, int64_t out_len,
                                    int64_t *frames, int64_t *bins) {
  return Guard([&] {
    Require(model != nullptr, "model must not be NULL");
    Require(noisy != nullptr, "noisy samples must not be NULL");
    vfkit::dsp::AudioBuffer audio;
    audio.samples.assign(noisy, noisy + n_noisy);
    vfkit::dsp::ValidateAudio(audio);
    const int64_t t = vfkit::dsp::StftFrameCount(audio.size());
    const int64_t f = model->model.config().bins;
    if (frames) *frames = t;
    if (bins) *bins = f;
    if (!out) return;
    Require(out_len == t * f, "output buffer must hold frames * bins values");
    const auto mag = vfkit::dsp::Magnitude(vfkit::dsp::Stft(audio));
    vfkit::voicefilter::SoftMask mask;
    if (model->model.config().permutation_invariant) {
      mask = vfkit::voicefilter::ForwardMaskPair(mag, model->model).first;
    } else {
      Require(dvector != nullptr, "d-vector must not be NULL");
      vfkit::encoder::SpeakerEmbedding d{std::vector<double>(dvector, dvector + dvector_len)};
      mask = vfkit::voicefilter::ForwardMask(mag, d, model->model);
    }
    std::copy(mask.data.begin(), mask.data.end(), out);
  });
}

vfkit_status vfkit_enhance_file(const vfkit_voicefilter *model, const vfkit_encoder *encoder,
                                const char *noisy_wav, const char *reference_wav,
                                const char *out_wav) {
  return Guard([&] {
    Require(model != nullptr, "model must not be NULL");
    const auto noisy = vfkit::dsp::ReadWav(Str(noisy_wav, "noisy path required"));
    vfkit::encoder::SpeakerEmbedding dvec;
    if (!model->model.config().permutation_invariant) {
      const auto reference = vfkit::dsp::ReadWav(Str(reference_wav, "reference path required"));
      dvec = vfkit::encoder::DVector(reference, PickEncoder(model, encoder));
    }
    const std::string out = Str(out_wav, "output path required");
    vfkit::dsp::WriteWav(out, vfkit::voicefilter::Enhance(noisy, dvec, model->model));
  });
}

vfkit_status vfkit_evaluate(const vfkit_voicefilter *model, const vfkit_encoder *encoder,
                            const char *manifest_path, const char *triplets_path,
                            const char *out_csv, vfkit_eval_summary *summary) {
  return Guard([&] {
    Require(model != nullptr, "model must not be NULL");
    const auto manifest =
        vfkit::datagen::ReadManifest(Str(manifest_path, "manifest path required"));
    const auto triplets =
        vfkit::datagen::ReadTriplets(Str(triplets_path, "triplets path required"));
    const std::string out = Str(out_csv, "output path required");
    // The permutation-invariant variant never computes a d-vector.
    vfkit::encoder::EncoderModel unused;
    const bool needs_encoder = !model->model.config().permutation_invariant;
    const auto &enc = needs_encoder || encoder || model->encoder
                          ? PickEncoder(model, encoder)
                          : unused;
    const auto report = vfkit::eval::Evaluate(
        manifest, triplets, vfkit::eval::NetworkMaskFactory(model->model, enc));
    vfkit::eval::WriteReport(out, report);
    FillSummary(report, summary);
  });
}

vfkit_status vfkit_evaluate_oracle(const char *manifest_path, const char *triplets_path,
                                   const char *out_csv, vfkit_eval_summary *summary) {
  return Guard([&] {
    const auto manifest =
        vfkit::datagen::ReadManifest(Str(manifest_path, "manifest path required"));
    const auto triplets =
        vfkit::datagen::ReadTriplets(Str(triplets_path, "triplets path required"));
    const std::string out = Str(out_csv, "output path required");
    const auto report =
        vfkit::eval::Evaluate(manifest, triplets, vfkit::eval::OracleMaskFactory());
    vfkit::eval::WriteReport(out, report);
    FillSummary(report, summary);
  });
}

vfkit_status vfkit_sdr(const double *estimate, int64_t n_estimate, const double *reference,
                       int64_t n_reference, double *out_db) {
  return Guard([&] {
    Require(estimate != nullptr && reference != nullptr && out_db != nullptr,
            "pointers must not be NULL");
    Require(n_estimate >= 0 && n_reference >= 0, "lengths must be non-negative");
    *out_db = vfkit::eval::Sdr(std::span<const double>(estimate, n_estimate),
                               std::span<const double>(reference, n_reference));
  });
}

}  // extern "C"
