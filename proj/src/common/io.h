// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vfkit {

// Base class for every error raised by the library. The category is mapped
// onto a status code at the C boundary.
class Error : public std::runtime_error {
 public:
  enum class Kind { kInvalidArgument, kIo, kFormat, kDiverged };
  Error(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] void ThrowInvalid(const std::string &what);
[[noreturn]] void ThrowIo(const std::string &what);
[[noreturn]] void ThrowFormat(const std::string &what);

std::string ReadFileBytes(const std::filesystem::path &path);

// Writes to a sibling temporary file and renames it over the target, so
// readers never observe a partially written output.
void AtomicWriteFile(const std::filesystem::path &path, std::string_view bytes);

}  // namespace vfkit
