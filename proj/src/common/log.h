// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

namespace vfkit {

enum class LogLevel { kInfo, kWarning };

// Diagnostics go to stderr only; stdout is reserved for results.
void Log(LogLevel level, const std::string &message);
inline void LogWarning(const std::string &message) {
  Log(LogLevel::kWarning, message);
}
inline void LogInfo(const std::string &message) {
  Log(LogLevel::kInfo, message);
}

// Silences kInfo messages (warnings are always printed).
void SetVerbose(bool verbose);

}  // namespace vfkit
