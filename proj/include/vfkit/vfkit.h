// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// C interface of the vfkit library. Every fallible call returns a
// vfkit_status; on failure vfkit_last_error() describes the problem for the
// calling thread. Handles are opaque and released with the matching _free.

#ifndef VFKIT_VFKIT_H_
#define VFKIT_VFKIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(VFKIT_BUILDING_LIBRARY)
#define VFKIT_API __attribute__((visibility("default")))
#else
#define VFKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vfkit_status {
  VFKIT_OK = 0,
  VFKIT_ERR_INVALID_ARGUMENT = 1,
  VFKIT_ERR_IO = 2,
  VFKIT_ERR_FORMAT = 3,
  VFKIT_ERR_DIVERGED = 4,
  VFKIT_ERR_INTERNAL = 5,
} vfkit_status;

typedef struct vfkit_encoder vfkit_encoder;
typedef struct vfkit_voicefilter vfkit_voicefilter;

// Called once per training step.
typedef void (*vfkit_progress_fn)(int64_t step, double loss, double grad_norm,
                                  void *user_data);

// Message of the last failed call on this thread ("" if none).
VFKIT_API const char *vfkit_last_error(void);
VFKIT_API const char *vfkit_status_name(vfkit_status status);
VFKIT_API const char *vfkit_version(void);
// Version recorded in every checkpoint this library writes.
VFKIT_API int vfkit_checkpoint_format_version(void);

// ---- Corpus and triplets ---------------------------------------------------

typedef struct vfkit_synth_options {
  int n_speakers;        // default 8
  int utts_per_speaker;  // default 10
  uint64_t seed;
  int test_speakers;  // > 0 also writes train.jsonl / test.jsonl
} vfkit_synth_options;

VFKIT_API void vfkit_synth_options_init(vfkit_synth_options *options);
VFKIT_API vfkit_status vfkit_synth_corpus(const vfkit_synth_options *options,
                                          const char *out_dir);

// weight_mode: "fixed", "u01" or "u02".
VFKIT_API vfkit_status vfkit_mix_triplets(const char *manifest_path, int64_t n,
                                          uint64_t seed, const char *weight_mode,
                                          const char *out_path);

// ---- Speaker encoder -------------------------------------------------------

typedef struct vfkit_encoder_train_options {
  int64_t steps;  // default 500
  uint64_t seed;
  int speakers_per_batch;      // default 4
  int utterances_per_speaker;  // default 3
  double learning_rate;        // default 1e-3
  double clip_grad_norm;       // default 3, <= 0 disables
  int hidden;                  // default 256
  int64_t checkpoint_every;    // 0: only at the end
} vfkit_encoder_train_options;

VFKIT_API void vfkit_encoder_train_options_init(vfkit_encoder_train_options *options);
// Trains on every speaker of the manifest and writes out_path. When out is
// non-NULL it receives the trained encoder.
VFKIT_API vfkit_status vfkit_encoder_train(const char *manifest_path,
                                           const vfkit_encoder_train_options *options,
                                           vfkit_progress_fn progress, void *user_data,
                                           const char *out_path, vfkit_encoder **out);
VFKIT_API vfkit_status vfkit_encoder_load(const char *path, vfkit_encoder **out);
VFKIT_API void vfkit_encoder_free(vfkit_encoder *encoder);
VFKIT_API int vfkit_encoder_embedding_dim(const vfkit_encoder *encoder);
// Unit-norm d-vector of 16 kHz mono samples; out must hold
// vfkit_encoder_embedding_dim() values.
VFKIT_API vfkit_status vfkit_encoder_dvector(const vfkit_encoder *encoder,
                                             const double *samples, int64_t n_samples,
                                             double *out, int64_t out_len);

// ---- VoiceFilter -----------------------------------------------------------

typedef struct vfkit_train_options {
  int64_t steps;  // default 2000
  uint64_t seed;
  int batch_size;        // default 4
  double learning_rate;  // default 1e-3
  double clip_grad_norm;  // default 5, <= 0 disables
  const char *lstm_mode;  // "none", "uni" (default) or "bi"
  const char *scale;      // "default" or "test"
  double power;           // default 0.3
  int permutation_invariant;  // non-zero: two-mask baseline without d-vector
  int64_t checkpoint_every;   // 0: only at the end
  int frame_norm;             // default 1: standardize CNN output frames
} vfkit_train_options;

VFKIT_API void vfkit_train_options_init(vfkit_train_options *options);
// Trains on the triplets (utterance ids resolved through manifest_path) with
// d-vectors from encoder, which is stored in the checkpoint.
VFKIT_API vfkit_status vfkit_voicefilter_train(const char *manifest_path,
                                               const char *triplets_path,
                                               const vfkit_encoder *encoder,
                                               const vfkit_train_options *options,
                                               vfkit_progress_fn progress,
                                               void *user_data, const char *out_path);
VFKIT_API vfkit_status vfkit_voicefilter_load(const char *path, vfkit_voicefilter **out);
VFKIT_API void vfkit_voicefilter_free(vfkit_voicefilter *model);
// Encoder stored in the checkpoint, or NULL. Owned by the model.
VFKIT_API const vfkit_encoder *vfkit_voicefilter_encoder(const vfkit_voicefilter *model);
VFKIT_API int vfkit_voicefilter_bins(const vfkit_voicefilter *model);

// Soft mask for a noisy signal: frames x bins values, frame-major. Call with
// out = NULL to query the sizes.
VFKIT_API vfkit_status vfkit_voicefilter_mask(const vfkit_voicefilter *model,
                                              const double *noisy, int64_t n_noisy,
                                              const double *dvector, int64_t dvector_len,
                                              double *out, int64_t out_len,
                                              int64_t *frames, int64_t *bins);

// Reads noisy and reference WAVs, writes the enhanced WAV. encoder may be
// NULL to use the one stored with the model.
VFKIT_API vfkit_status vfkit_enhance_file(const vfkit_voicefilter *model,
                                          const vfkit_encoder *encoder,
                                          const char *noisy_wav, const char *reference_wav,
                                          const char *out_wav);

// ---- Evaluation ------------------------------------------------------------

typedef struct vfkit_eval_summary {
  int64_t count;
  int64_t skipped;
  double noisy_mean_db, noisy_median_db;
  double enhanced_mean_db, enhanced_median_db;
} vfkit_eval_summary;

// Writes the CSV report and its JSON sidecar. encoder may be NULL to use the
// model's own. summary may be NULL.
VFKIT_API vfkit_status vfkit_evaluate(const vfkit_voicefilter *model,
                                      const vfkit_encoder *encoder,
                                      const char *manifest_path, const char *triplets_path,
                                      const char *out_csv, vfkit_eval_summary *summary);
// Same report with the ideal ratio mask |S| / (|S| + |I|) in place of a model.
VFKIT_API vfkit_status vfkit_evaluate_oracle(const char *manifest_path,
                                             const char *triplets_path,
                                             const char *out_csv,
                                             vfkit_eval_summary *summary);

// Projection-form SDR in dB of estimate against reference.
VFKIT_API vfkit_status vfkit_sdr(const double *estimate, int64_t n_estimate,
                                 const double *reference, int64_t n_reference,
                                 double *out_db);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // VFKIT_VFKIT_H_
