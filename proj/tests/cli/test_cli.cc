// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef VFKIT_CLI_PATH
#error "VFKIT_CLI_PATH must name the vfkit binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

size_t CountLines(const fs::path &p) {
  std::ifstream in(p);
  size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("vfkit_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string &name) const { return (dir / name).string(); }

  Result Run(const std::string &args) const {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(VFKIT_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }
};

// Corpus, encoder and a one-step model shared by the cases below.
const Workspace &Shared() {
  static Workspace w;
  static bool ready = [] {
    REQUIRE(w.Run("synth --speakers 3 --utts 3 --seed 4 --out " + w / "corpus").code == 0);
    REQUIRE(w.Run("mix --manifest " + w / "corpus/manifest.jsonl" + " --n 4 --seed 5 --out " +
                  w / "corpus/triplets.jsonl")
                .code == 0);
    REQUIRE(w.Run("train-encoder --manifest " + w / "corpus/manifest.jsonl" +
                  " --steps 1 --seed 6 --hidden 16 --speakers-per-batch 3 --utts-per-speaker 2 "
                  "--out " +
                  w / "enc.ckpt")
                .code == 0);
    const Result r = w.Run("train --triplets " + w / "corpus/triplets.jsonl" + " --encoder " +
                           w / "enc.ckpt" +
                           " --scale test --steps 2 --batch 1 --seed 7 --out " + w / "vf.ckpt");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("step=2 loss=") != std::string::npos);
    CHECK(r.out.find("wrote") != std::string::npos);
    return true;
  }();
  (void)ready;
  return w;
}

std::string AnyWav(const Workspace &w) {
  for (const auto &e : fs::directory_iterator(w.dir / "corpus" / "wav")) return e.path().string();
  return {};
}

}  // namespace

TEST_CASE("version prints the checkpoint format") {
  Workspace w;
  const auto r = w.Run("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("vfkit 0.1.0") != std::string::npos);
  CHECK(r.out.find("format_version 1") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  Workspace w;
  auto r = w.Run("mix --manifest m.jsonl --n 3 --out t.jsonl");
  CHECK(r.code == 2);
  CHECK(r.err.find("--seed") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(w.Run("synth --speakers 2 --utts 1 --seed 1 --out x --bogus").code == 2);
  CHECK(w.Run("frobnicate").code == 2);
  CHECK(w.Run("train --triplets t --encoder e --seed 1 --out o --lstm gru").code == 2);
}

TEST_CASE("validation failures exit 1 with one machine-parsable line") {
  Workspace w;
  auto r = w.Run("mix --manifest " + w / "missing.jsonl" + " --n 3 --seed 1 --out " + w / "t.jsonl");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("vfkit: error[", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK_FALSE(fs::exists(w / "t.jsonl"));
}

TEST_CASE("eval on an empty triplet manifest fails") {
  const auto &w = Shared();
  std::ofstream(w / "empty.jsonl").close();
  auto r = w.Run("eval --model " + w / "vf.ckpt" + " --triplets " + w / "empty.jsonl" +
                 " --manifest " + w / "corpus/manifest.jsonl" + " --out " + w / "r.csv");
  CHECK(r.code == 1);
  CHECK(r.err.find("empty manifest") != std::string::npos);
  r = w.Run("eval --oracle --triplets " + w / "empty.jsonl" + " --manifest " +
            w / "corpus/manifest.jsonl" + " --out " + w / "r.csv");
  CHECK(r.code == 1);
  CHECK(r.err.find("empty manifest") != std::string::npos);
}

TEST_CASE("enhance happy path") {
  const auto &w = Shared();
  const std::string wav = AnyWav(w);
  const std::string before = Slurp(wav);
  auto r = w.Run("enhance --model " + w / "vf.ckpt" + " --noisy " + wav + " --reference " + wav +
                 " --out " + w / "y.wav");
  CHECK(r.code == 0);
  CHECK(fs::file_size(w / "y.wav") > 44);
  CHECK(Slurp(wav) == before);
  r = w.Run("enhance --model " + w / "vf.ckpt" + " --encoder " + w / "enc.ckpt" + " --noisy " +
            wav + " --reference " + wav + " --out " + w / "y2.wav");
  CHECK(r.code == 0);
  CHECK(Slurp(w / "y.wav") == Slurp(w / "y2.wav"));
  r = w.Run("enhance --model " + w / "vf.ckpt" + " --noisy " + w / "nope.wav" + " --reference " +
            wav + " --out " + w / "y3.wav");
  CHECK(r.code == 1);
}

TEST_CASE("eval writes a report and summary") {
  const auto &w = Shared();
  auto r = w.Run("eval --model " + w / "vf.ckpt" + " --triplets " + w / "corpus/triplets.jsonl" +
                 " --out " + w / "report.csv");
  CHECK(r.code == 0);
  CHECK(r.out.find("median") != std::string::npos);
  CHECK(CountLines(w / "report.csv") == 5);
  CHECK(fs::exists(w / "report.json"));
  r = w.Run("eval --model " + w / "vf.ckpt" + " --triplets " + w / "corpus/triplets.jsonl" +
            " --out " + w / "report2.csv");
  CHECK(Slurp(w / "report.csv") == Slurp(w / "report2.csv"));
  CHECK(Slurp(w / "report.json") == Slurp(w / "report2.json"));
}

TEST_CASE("identical commands give identical outputs") {
  const auto &w = Shared();
  const std::string args = "mix --manifest " + w / "corpus/manifest.jsonl" +
                           " --n 7 --seed 9 --weights u02 --out ";
  REQUIRE(w.Run(args + w / "a.jsonl").code == 0);
  REQUIRE(w.Run(args + w / "b.jsonl").code == 0);
  CHECK(Slurp(w / "a.jsonl") == Slurp(w / "b.jsonl"));
  const std::string train = "train --triplets " + w / "corpus/triplets.jsonl" + " --encoder " +
                            w / "enc.ckpt" + " --scale test --steps 1 --batch 1 --seed 7 --out ";
  REQUIRE(w.Run(train + w / "m1.ckpt").code == 0);
  REQUIRE(w.Run(train + w / "m2.ckpt").code == 0);
  CHECK(Slurp(w / "m1.ckpt") == Slurp(w / "m2.ckpt"));
}

TEST_CASE("config file pre-seeds flags and the command line wins") {
  const auto &w = Shared();
  std::ofstream(w / "mix.cfg") << "# mixing defaults\nmanifest=" << w / "corpus/manifest.jsonl"
                               << "\nn=3\nseed=11\nweights=u01\n";
  auto r = w.Run("--config " + w / "mix.cfg" + " mix --out " + w / "c1.jsonl");
  CHECK(r.code == 0);
  CHECK(CountLines(w / "c1.jsonl") == 3);
  r = w.Run("--config " + w / "mix.cfg" + " mix --n 6 --out " + w / "c2.jsonl");
  CHECK(r.code == 0);
  CHECK(CountLines(w / "c2.jsonl") == 6);
  r = w.Run("mix --manifest " + w / "corpus/manifest.jsonl" +
            " --n 3 --seed 11 --weights u01 --out " + w / "c3.jsonl");
  CHECK(Slurp(w / "c1.jsonl") == Slurp(w / "c3.jsonl"));
  CHECK(w.Run("--config " + w / "missing.cfg" + " mix --out " + w / "c4.jsonl").code != 0);
}
