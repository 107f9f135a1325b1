// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsp/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "common/io.h"
#include "common/log.h"

namespace vfkit::dsp {
namespace {

uint32_t ReadU32(const char *p) {
  const auto *u = reinterpret_cast<const unsigned char *>(p);
  return uint32_t{u[0]} | uint32_t{u[1]} << 8 | uint32_t{u[2]} << 16 |
         uint32_t{u[3]} << 24;
}
uint16_t ReadU16(const char *p) {
  const auto *u = reinterpret_cast<const unsigned char *>(p);
  return static_cast<uint16_t>(u[0] | u[1] << 8);
}
void PutU32(std::string &s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string &s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioBuffer DecodeWav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE")
    ThrowFormat("not a RIFF/WAVE file");
  size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const uint32_t size = ReadU32(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size() && id != "data")
      ThrowFormat("truncated WAV chunk");
    if (id == "fmt ") {
      if (size < 16) ThrowFormat("malformed fmt chunk");
      const char *f = bytes.data() + body;
      const uint16_t format = ReadU16(f);
      const uint16_t channels = ReadU16(f + 2);
      const uint32_t rate = ReadU32(f + 4);
      const uint16_t bits = ReadU16(f + 14);
      if (format != 1) ThrowFormat("16-bit PCM required (format tag " +
                                   std::to_string(format) + ")");
      if (channels != 1)
        ThrowFormat("mono required (file has " + std::to_string(channels) +
                    " channels)");
      if (rate != static_cast<uint32_t>(kSampleRate))
        ThrowFormat("unsupported sample rate " + std::to_string(rate) +
                    " (16000 required)");
      if (bits != 16)
        ThrowFormat("16-bit PCM required (file has " + std::to_string(bits) +
                    " bits)");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) ThrowFormat("data chunk before fmt chunk");
      const size_t avail = std::min<size_t>(size, bytes.size() - body);
      AudioBuffer audio;
      audio.samples.resize(avail / 2);
      for (size_t i = 0; i < audio.samples.size(); ++i) {
        const auto v = static_cast<int16_t>(ReadU16(bytes.data() + body + 2 * i));
        audio.samples[i] = v / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  ThrowFormat(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioBuffer ReadWav(const std::filesystem::path &path) {
  try {
    return DecodeWav(ReadFileBytes(path));
  } catch (const Error &e) {
    if (e.kind() == Error::Kind::kFormat)
      ThrowFormat(path.string() + ": " + e.what());
    throw;
  }
}

std::string EncodeWav(const AudioBuffer &audio) {
  ValidateAudio(audio);
  const uint32_t data_bytes = static_cast<uint32_t>(audio.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, kSampleRate);
  PutU32(out, kSampleRate * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  int64_t clipped = 0;
  for (double s : audio.samples) {
    double q = std::nearbyint(s * 32768.0);
    if (q > 32767.0 || q < -32768.0) {
      ++clipped;
      q = std::clamp(q, -32768.0, 32767.0);
    }
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  if (clipped > 0)
    LogWarning("clamped " + std::to_string(clipped) +
               " out-of-range samples while writing WAV");
  return out;
}

void WriteWav(const std::filesystem::path &path, const AudioBuffer &audio) {
  AtomicWriteFile(path, EncodeWav(audio));
}

}  // namespace vfkit::dsp
