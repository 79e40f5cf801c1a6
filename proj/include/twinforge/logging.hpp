#pragma once

#include <string_view>

namespace twinforge {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold comes from TWINFORGE_LOG (error|warn|info|debug), default warn.
void log(LogLevel level, std::string_view msg);

LogLevel log_threshold();

}  // namespace twinforge
