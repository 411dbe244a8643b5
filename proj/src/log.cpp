#include "latcas/log.hpp"

#include <iostream>
#include <mutex>

namespace latcas {

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
LogLevel g_level = LogLevel::warning;
std::function<void(LogLevel, const std::string&)> g_sink;

const char* tag(LogLevel l) {
  switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warning: return "warning";
    case LogLevel::error: return "error";
    default: return "";
  }
}

}  // namespace

void set_log_level(LogLevel level) {
  std::lock_guard lock(log_mutex());
  g_level = level;
}

LogLevel log_level() {
  std::lock_guard lock(log_mutex());
  return g_level;
}

void set_log_sink(std::function<void(LogLevel, const std::string&)> sink) {
  std::lock_guard lock(log_mutex());
  g_sink = std::move(sink);
}

void log(LogLevel level, const std::string& msg) {
  std::lock_guard lock(log_mutex());
  if (level < g_level) return;
  if (g_sink) {
    g_sink(level, msg);
  } else {
    std::cerr << "[" << tag(level) << "] " << msg << "\n";
  }
}

}  // namespace latcas
