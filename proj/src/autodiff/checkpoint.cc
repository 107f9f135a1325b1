// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "autodiff/checkpoint.h"

#include <bit>
#include <cstring>

#include "autodiff/layer_spec.h"
#include "common/io.h"

namespace vfkit::ad {

const char *LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kLstm: return "lstm";
    case LayerKind::kBiLstm: return "bilstm";
    case LayerKind::kFc: return "fc";
  }
  return "fc";
}

nlohmann::json LayerSpecToJson(const LayerSpec &spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["kind"] = LayerKindName(spec.kind);
  j["width_time"] = spec.width_time;
  j["width_freq"] = spec.width_freq;
  j["dilation_time"] = spec.dilation_time;
  j["dilation_freq"] = spec.dilation_freq;
  j["units"] = spec.units;
  j["activation"] = ActivationName(spec.activation);
  return j;
}

LayerSpec LayerSpecFromJson(const nlohmann::json &j) {
  try {
    LayerSpec s;
    s.name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv2d") s.kind = LayerKind::kConv2d;
    else if (kind == "lstm") s.kind = LayerKind::kLstm;
    else if (kind == "bilstm") s.kind = LayerKind::kBiLstm;
    else if (kind == "fc") s.kind = LayerKind::kFc;
    else ThrowFormat("unknown layer kind '" + kind + "'");
    s.width_time = j.at("width_time").get<int>();
    s.width_freq = j.at("width_freq").get<int>();
    s.dilation_time = j.at("dilation_time").get<int>();
    s.dilation_freq = j.at("dilation_freq").get<int>();
    s.units = j.at("units").get<int>();
    s.activation = ParseActivation(j.at("activation").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception &e) {
    ThrowFormat(std::string("bad layer spec: ") + e.what());
  }
}

namespace {

constexpr char kMagic[4] = {'V', 'F', 'C', 'K'};

void PutU32(std::string &s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
uint32_t GetU32(const char *p) {
  const auto *u = reinterpret_cast<const unsigned char *>(p);
  return uint32_t{u[0]} | uint32_t{u[1]} << 8 | uint32_t{u[2]} << 16 |
         uint32_t{u[3]} << 24;
}

}  // namespace

const std::string Checkpoint::model_kind() const {
  return header.value("model_kind", std::string());
}

std::string EncodeCheckpoint(const nlohmann::json &meta,
                             const ParameterSet<float> &params) {
  nlohmann::json header = meta;
  header["format_version"] = kCheckpointFormatVersion;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto &[name, t] : params.entries())
    tensors.push_back({{"name", name}, {"shape", t.shape()}});
  header["tensors"] = tensors;
  const std::string text = header.dump();

  std::string out(kMagic, 4);
  PutU32(out, static_cast<uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + params.TotalElements() * 4);
  for (const auto &e : params.entries())
    for (float v : e.second.values()) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

Checkpoint DecodeCheckpoint(const std::string &bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    ThrowFormat("not a vfkit checkpoint");
  const uint32_t len = GetU32(bytes.data() + 4);
  if (8 + static_cast<size_t>(len) > bytes.size())
    ThrowFormat("truncated checkpoint header");
  Checkpoint ckpt;
  try {
    ckpt.header = nlohmann::json::parse(bytes.substr(8, len));
  } catch (const nlohmann::json::exception &e) {
    ThrowFormat(std::string("bad checkpoint header: ") + e.what());
  }
  if (ckpt.header.value("format_version", -1) != kCheckpointFormatVersion)
    ThrowFormat("unsupported checkpoint format_version");
  size_t pos = 8 + len;
  try {
    for (const auto &rec : ckpt.header.at("tensors")) {
      TensorRecord t;
      t.name = rec.at("name").get<std::string>();
      t.shape = rec.at("shape").get<Shape>();
      const int64_t n = NumElements(t.shape);
      if (pos + 4 * static_cast<size_t>(n) > bytes.size())
        ThrowFormat("truncated checkpoint data at tensor " + t.name);
      t.values.resize(n);
      for (int64_t i = 0; i < n; ++i, pos += 4)
        t.values[i] = std::bit_cast<float>(GetU32(bytes.data() + pos));
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception &e) {
    ThrowFormat(std::string("bad checkpoint tensor table: ") + e.what());
  }
  if (pos != bytes.size()) ThrowFormat("trailing bytes after checkpoint data");
  return ckpt;
}

void WriteCheckpoint(const std::filesystem::path &path,
                     const nlohmann::json &meta,
                     const ParameterSet<float> &params) {
  AtomicWriteFile(path, EncodeCheckpoint(meta, params));
}

Checkpoint ReadCheckpoint(const std::filesystem::path &path) {
  try {
    return DecodeCheckpoint(ReadFileBytes(path));
  } catch (const Error &e) {
    if (e.kind() == Error::Kind::kFormat)
      ThrowFormat(path.string() + ": " + e.what());
    throw;
  }
}

void LoadParameters(const Checkpoint &ckpt, ParameterSet<float> &params,
                    const std::string &prefix) {
  std::vector<const TensorRecord *> selected;
  for (const auto &t : ckpt.tensors)
    if (t.name.compare(0, prefix.size(), prefix) == 0) selected.push_back(&t);
  if (selected.size() != params.size())
    ThrowFormat("checkpoint has " + std::to_string(selected.size()) +
                " tensors under '" + prefix + "', model expects " +
                std::to_string(params.size()));
  for (size_t i = 0; i < selected.size(); ++i) {
    const auto &[name, tensor] = params.entries()[i];
    const TensorRecord &rec = *selected[i];
    if (rec.name.substr(prefix.size()) != name || rec.shape != tensor.shape())
      ThrowFormat("checkpoint tensor " + rec.name + " " +
                  ShapeToString(rec.shape) + " does not match parameter " +
                  name + " " + ShapeToString(tensor.shape()));
    Tensor<float> dst = tensor;
    std::copy(rec.values.begin(), rec.values.end(), dst.mutable_values().begin());
  }
}

}  // namespace vfkit::ad
