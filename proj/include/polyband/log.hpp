// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace polyband {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Level from POLYBAND_LOG (error|info|debug), read once. Default: error.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("POLYBAND_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

inline void log_at(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) {
    std::fprintf(stderr, "polyband: %s\n", msg.c_str());
  }
}

inline void log_error(const std::string& msg) { log_at(LogLevel::Error, msg); }
inline void log_info(const std::string& msg) { log_at(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_at(LogLevel::Debug, msg); }

}  // namespace polyband
