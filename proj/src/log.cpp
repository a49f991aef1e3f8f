#include "thermotrack/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace thermotrack::log {

Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("THERMOTRACK_LOG");
    if (!env) return Level::info;
    const std::string_view v(env);
    if (v == "error") return Level::error;
    if (v == "debug") return Level::debug;
    return Level::info;
  }();
  return level;
}

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[thermotrack] " << message << '\n';
}

}  // namespace thermotrack::log
