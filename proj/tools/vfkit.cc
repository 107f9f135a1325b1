// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// vfkit command-line tool. Subcommands: synth, mix, train-encoder, train,
// enhance, eval. Progress goes to stderr as "step=N loss=X"; results go to
// stdout. Exit codes: 0 success, 1 failure (one "vfkit: error[kind]: ..."
// line on stderr), 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vfkit/vfkit.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Raised for failures detected before the library is called.
struct CliFailure {
  std::string kind;
  std::string message;
};

void Check(vfkit_status status) {
  if (status != VFKIT_OK) throw CliFailure{vfkit_status_name(status), vfkit_last_error()};
}

void RequireFile(const std::string &path, const char *flag) {
  if (!fs::is_regular_file(path))
    throw CliFailure{"io", std::string(flag) + ": no such file: " + path};
}

void PrintProgress(int64_t step, double loss, double grad_norm, void *) {
  std::fprintf(stderr, "step=%lld loss=%.6g grad_norm=%.6g\n",
               static_cast<long long>(step), loss, grad_norm);
}

std::string DefaultManifest(const std::string &triplets) {
  return (fs::path(triplets).parent_path() / "manifest.jsonl").string();
}

// Reads "key=value" lines ('#' starts a comment) and returns them as
// "--key", "value" pairs for every key not already present in args.
std::vector<std::string> ConfigArgs(const std::string &path,
                                    const std::vector<std::string> &args) {
  std::ifstream in(path);
  if (!in) throw CliFailure{"io", "--config: cannot read " + path};
  std::set<std::string> given;
  for (const auto &a : args) {
    if (a.rfind("--", 0) != 0) continue;
    given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliFailure{"invalid_argument", "--config: line " + std::to_string(lineno) +
                                               " is not key=value"};
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    if (given.count(key)) continue;
    given.insert(key);
    // Flags without a value ("pit=true") become bare switches.
    if (value == "true") {
      out.push_back(key);
    } else if (value != "false") {
      out.push_back(key);
      out.push_back(value);
    }
  }
  return out;
}

// argv with --config expanded in place: the file's entries follow the
// subcommand name so they bind to it.
std::vector<std::string> ExpandConfig(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) return args;  // let the parser report it
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty()) return rest;
  const auto extra = ConfigArgs(config, rest);
  size_t pos = 0;
  while (pos < rest.size() && rest[pos].rfind("-", 0) == 0) ++pos;
  if (pos < rest.size()) ++pos;  // after the subcommand
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos), extra.begin(), extra.end());
  return rest;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"vfkit: speaker-conditioned speech separation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("vfkit ") + vfkit_version() +
                                        "\ncheckpoint format_version " +
                                        std::to_string(vfkit_checkpoint_format_version()));
  std::string config_unused;
  app.add_option("--config", config_unused, "File of key=value lines pre-seeding flags");

  // synth
  vfkit_synth_options synth;
  vfkit_synth_options_init(&synth);
  std::string synth_out;
  auto *cmd_synth = app.add_subcommand("synth", "Generate the synthetic toy corpus");
  cmd_synth->add_option("--speakers", synth.n_speakers, "Number of speakers")->required();
  cmd_synth->add_option("--utts", synth.utts_per_speaker, "Utterances per speaker")->required();
  cmd_synth->add_option("--seed", synth.seed, "Random seed")->required();
  cmd_synth->add_option("--test-speakers", synth.test_speakers,
                        "Speakers held out into test.jsonl");
  cmd_synth->add_option("--out", synth_out, "Output directory")->required();

  // mix
  std::string mix_manifest, mix_out, mix_weights = "fixed";
  int64_t mix_n = 0;
  uint64_t mix_seed = 0;
  auto *cmd_mix = app.add_subcommand("mix", "Sample training triplets");
  cmd_mix->add_option("--manifest", mix_manifest, "Corpus manifest")->required();
  cmd_mix->add_option("--n", mix_n, "Number of triplets")->required();
  cmd_mix->add_option("--seed", mix_seed, "Random seed")->required();
  cmd_mix->add_option("--weights", mix_weights, "Interference weight mode")
      ->check(CLI::IsMember({"fixed", "u01", "u02"}));
  cmd_mix->add_option("--out", mix_out, "Output triplet list")->required();

  // train-encoder
  vfkit_encoder_train_options enc;
  vfkit_encoder_train_options_init(&enc);
  std::string enc_manifest, enc_out;
  auto *cmd_enc = app.add_subcommand("train-encoder", "Train the speaker encoder");
  cmd_enc->add_option("--manifest", enc_manifest, "Corpus manifest")->required();
  cmd_enc->add_option("--steps", enc.steps, "Training steps");
  cmd_enc->add_option("--seed", enc.seed, "Random seed")->required();
  cmd_enc->add_option("--lr", enc.learning_rate, "Adam learning rate");
  cmd_enc->add_option("--speakers-per-batch", enc.speakers_per_batch, "Speakers per batch");
  cmd_enc->add_option("--utts-per-speaker", enc.utterances_per_speaker,
                      "Utterances per speaker per batch");
  cmd_enc->add_option("--hidden", enc.hidden, "LSTM width");
  cmd_enc->add_option("--clip", enc.clip_grad_norm, "Gradient norm clip (<= 0: off)");
  cmd_enc->add_option("--checkpoint-every", enc.checkpoint_every, "Checkpoint period");
  cmd_enc->add_option("--out", enc_out, "Output checkpoint")->required();

  // train
  vfkit_train_options tr;
  vfkit_train_options_init(&tr);
  std::string tr_triplets, tr_manifest, tr_encoder, tr_out, tr_lstm = "uni",
                                                            tr_scale = "default";
  bool tr_pit = false;
  bool tr_no_frame_norm = false;
  auto *cmd_train = app.add_subcommand("train", "Train the mask network");
  cmd_train->add_option("--triplets", tr_triplets, "Training triplet list")->required();
  cmd_train->add_option("--manifest", tr_manifest,
                        "Corpus manifest (default: manifest.jsonl beside the triplets)");
  cmd_train->add_option("--encoder", tr_encoder, "Speaker encoder checkpoint")->required();
  cmd_train->add_option("--lstm", tr_lstm, "Recurrent layer")
      ->check(CLI::IsMember({"none", "uni", "bi"}));
  cmd_train->add_option("--scale", tr_scale, "Network size")
      ->check(CLI::IsMember({"default", "test"}));
  cmd_train->add_option("--steps", tr.steps, "Training steps");
  cmd_train->add_option("--seed", tr.seed, "Random seed")->required();
  cmd_train->add_option("--batch", tr.batch_size, "Batch size");
  cmd_train->add_option("--lr", tr.learning_rate, "Adam learning rate");
  cmd_train->add_option("--clip", tr.clip_grad_norm, "Gradient norm clip (<= 0: off)");
  cmd_train->add_option("--power", tr.power, "Compression exponent p");
  cmd_train->add_flag("--pit", tr_pit, "Speaker-independent two-mask baseline");
  cmd_train->add_flag("--no-frame-norm", tr_no_frame_norm,
                      "Feed the raw CNN output to the LSTM");
  cmd_train->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint period");
  cmd_train->add_option("--out", tr_out, "Output checkpoint")->required();

  // enhance
  std::string en_model, en_encoder, en_noisy, en_reference, en_out;
  auto *cmd_enhance = app.add_subcommand("enhance", "Extract the reference speaker");
  cmd_enhance->add_option("--model", en_model, "Mask network checkpoint")->required();
  cmd_enhance->add_option("--encoder", en_encoder,
                          "Encoder checkpoint (default: the one stored in --model)");
  cmd_enhance->add_option("--noisy", en_noisy, "Mixture WAV")->required();
  cmd_enhance->add_option("--reference", en_reference, "Reference WAV of the target")
      ->required();
  cmd_enhance->add_option("--out", en_out, "Output WAV")->required();

  // eval
  std::string ev_model, ev_encoder, ev_triplets, ev_manifest, ev_out;
  bool ev_oracle = false;
  auto *cmd_eval = app.add_subcommand("eval", "SDR report over a triplet list");
  cmd_eval->add_option("--model", ev_model, "Mask network checkpoint");
  cmd_eval->add_option("--encoder", ev_encoder,
                       "Encoder checkpoint (default: the one stored in --model)");
  cmd_eval->add_option("--triplets", ev_triplets, "Evaluation triplet list")->required();
  cmd_eval->add_option("--manifest", ev_manifest,
                       "Corpus manifest (default: manifest.jsonl beside the triplets)");
  cmd_eval->add_flag("--oracle", ev_oracle, "Use the ideal ratio mask instead of a model");
  cmd_eval->add_option("--out", ev_out, "Output CSV (JSON aggregates written beside it)")
      ->required();

  std::vector<std::string> args;
  try {
    args = ExpandConfig(argc, argv);
  } catch (const CliFailure &f) {
    std::fprintf(stderr, "vfkit: error[%s]: %s\n", f.kind.c_str(), f.message.c_str());
    return kExitFailure;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (cmd_eval->parsed() && !ev_oracle && ev_model.empty())
      throw CLI::RequiredError("--model (or --oracle)");
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::fprintf(stderr, "vfkit: usage error: %s\n\n", e.what());
    const CLI::App *sub = nullptr;
    for (const auto *s : app.get_subcommands()) sub = s;
    std::fputs((sub ? sub->help() : app.help()).c_str(), stderr);
    return kExitUsage;
  }

  try {
    if (cmd_synth->parsed()) {
      Check(vfkit_synth_corpus(&synth, synth_out.c_str()));
      std::printf("wrote %s\n", (fs::path(synth_out) / "manifest.jsonl").c_str());
    } else if (cmd_mix->parsed()) {
      RequireFile(mix_manifest, "--manifest");
      Check(vfkit_mix_triplets(mix_manifest.c_str(), mix_n, mix_seed, mix_weights.c_str(),
                               mix_out.c_str()));
      std::printf("wrote %s\n", mix_out.c_str());
    } else if (cmd_enc->parsed()) {
      RequireFile(enc_manifest, "--manifest");
      Check(vfkit_encoder_train(enc_manifest.c_str(), &enc, PrintProgress, nullptr,
                                enc_out.c_str(), nullptr));
      std::printf("wrote %s\n", enc_out.c_str());
    } else if (cmd_train->parsed()) {
      if (tr_manifest.empty()) tr_manifest = DefaultManifest(tr_triplets);
      RequireFile(tr_triplets, "--triplets");
      RequireFile(tr_manifest, "--manifest");
      RequireFile(tr_encoder, "--encoder");
      tr.lstm_mode = tr_lstm.c_str();
      tr.scale = tr_scale.c_str();
      tr.permutation_invariant = tr_pit ? 1 : 0;
      tr.frame_norm = tr_no_frame_norm ? 0 : 1;
      vfkit_encoder *encoder = nullptr;
      Check(vfkit_encoder_load(tr_encoder.c_str(), &encoder));
      const vfkit_status st =
          vfkit_voicefilter_train(tr_manifest.c_str(), tr_triplets.c_str(), encoder, &tr,
                                  PrintProgress, nullptr, tr_out.c_str());
      vfkit_encoder_free(encoder);
      Check(st);
      std::printf("wrote %s\n", tr_out.c_str());
    } else if (cmd_enhance->parsed()) {
      RequireFile(en_model, "--model");
      RequireFile(en_noisy, "--noisy");
      RequireFile(en_reference, "--reference");
      if (!en_encoder.empty()) RequireFile(en_encoder, "--encoder");
      vfkit_voicefilter *model = nullptr;
      vfkit_encoder *encoder = nullptr;
      vfkit_status st = vfkit_voicefilter_load(en_model.c_str(), &model);
      if (st == VFKIT_OK && !en_encoder.empty())
        st = vfkit_encoder_load(en_encoder.c_str(), &encoder);
      if (st == VFKIT_OK)
        st = vfkit_enhance_file(model, encoder, en_noisy.c_str(), en_reference.c_str(),
                                en_out.c_str());
      vfkit_encoder_free(encoder);
      vfkit_voicefilter_free(model);
      Check(st);
      std::printf("wrote %s\n", en_out.c_str());
    } else if (cmd_eval->parsed()) {
      if (ev_manifest.empty()) ev_manifest = DefaultManifest(ev_triplets);
      RequireFile(ev_triplets, "--triplets");
      RequireFile(ev_manifest, "--manifest");
      vfkit_eval_summary s{};
      if (ev_oracle) {
        Check(vfkit_evaluate_oracle(ev_manifest.c_str(), ev_triplets.c_str(),
                                    ev_out.c_str(), &s));
      } else {
        RequireFile(ev_model, "--model");
        if (!ev_encoder.empty()) RequireFile(ev_encoder, "--encoder");
        vfkit_voicefilter *model = nullptr;
        vfkit_encoder *encoder = nullptr;
        vfkit_status st = vfkit_voicefilter_load(ev_model.c_str(), &model);
        if (st == VFKIT_OK && !ev_encoder.empty())
          st = vfkit_encoder_load(ev_encoder.c_str(), &encoder);
        if (st == VFKIT_OK)
          st = vfkit_evaluate(model, encoder, ev_manifest.c_str(), ev_triplets.c_str(),
                              ev_out.c_str(), &s);
        vfkit_encoder_free(encoder);
        vfkit_voicefilter_free(model);
        Check(st);
      }
      std::printf("%-10s %10s %10s\n", "", "mean_db", "median_db");
      std::printf("%-10s %10.3f %10.3f\n", "noisy", s.noisy_mean_db, s.noisy_median_db);
      std::printf("%-10s %10.3f %10.3f\n", "enhanced", s.enhanced_mean_db,
                  s.enhanced_median_db);
      std::printf("utterances=%lld skipped=%lld report=%s\n",
                  static_cast<long long>(s.count), static_cast<long long>(s.skipped),
                  ev_out.c_str());
    }
  } catch (const CliFailure &f) {
    std::fprintf(stderr, "vfkit: error[%s]: %s\n", f.kind.c_str(), f.message.c_str());
    return kExitFailure;
  }
  return 0;
}
