#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace smapf {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Diagnostics level from ASCBS_LOG={error,info,debug}; default error.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("ASCBS_LOG");
        if (env == nullptr) return LogLevel::kError;
        if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
        if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
        return LogLevel::kError;
    }();
    return level;
}

// All diagnostics go to stderr; stdout stays parseable.
inline void log_line(LogLevel at, const std::string& msg) {
    if (static_cast<int>(at) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "%s\n", msg.c_str());
}

}  // namespace smapf
