// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "common/io.h"

#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace vfkit {

void ThrowInvalid(const std::string &what) {
  throw Error(Error::Kind::kInvalidArgument, what);
}
void ThrowIo(const std::string &what) { throw Error(Error::Kind::kIo, what); }
void ThrowFormat(const std::string &what) {
  throw Error(Error::Kind::kFormat, what);
}

std::string ReadFileBytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) ThrowIo("read failed: " + path.string());
  return ss.str();
}

void AtomicWriteFile(const std::filesystem::path &path, std::string_view bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) ThrowIo("cannot create directory " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) ThrowIo("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) ThrowIo("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    ThrowIo("cannot rename into " + path.string());
  }
}

}  // namespace vfkit
