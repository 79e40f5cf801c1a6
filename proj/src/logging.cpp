#include "twinforge/logging.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace twinforge {

namespace {

LogLevel parse_level(const char* s) {
    if (s == nullptr) return LogLevel::warn;
    std::string v(s);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

const char* tag(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

std::mutex g_mutex;

}  // namespace

LogLevel log_threshold() {
    static LogLevel level = parse_level(std::getenv("TWINFORGE_LOG"));
    return level;
}

void log(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[twinforge " << tag(level) << "] " << msg << "\n";
}

}  // namespace twinforge
