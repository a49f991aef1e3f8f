#pragma once

#include <string>

namespace thermotrack::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Level from THERMOTRACK_LOG (error | info | debug), default info.
Level threshold();

void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::info, "warning: " + m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace thermotrack::log
