// Copyright 2026 The vfkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "common/log.h"

#include <atomic>
#include <cstdio>

namespace vfkit {
namespace {
std::atomic<bool> g_verbose{true};
}

void SetVerbose(bool verbose) { g_verbose = verbose; }

void Log(LogLevel level, const std::string &message) {
  if (level == LogLevel::kInfo && !g_verbose) return;
  const char *tag = level == LogLevel::kWarning ? "WARNING" : "LOG";
  std::fprintf(stderr, "%s (vfkit) %s\n", tag, message.c_str());
}

}  // namespace vfkit
