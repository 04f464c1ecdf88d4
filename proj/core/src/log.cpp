#include "lphom/log.hpp"

#include <atomic>
#include <cstdarg>
#include <cstdlib>
#include <cstring>

namespace lphom::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("LPHOM_LOG");
  if (!env) return Level::error;
  if (std::strcmp(env, "debug") == 0) return Level::debug;
  if (std::strcmp(env, "info") == 0) return Level::info;
  return Level::error;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> lv{static_cast<int>(parse_env())};
  return lv;
}

}  // namespace

Level level() { return static_cast<Level>(level_slot().load()); }

void set_level(Level lv) { level_slot().store(static_cast<int>(lv)); }

void vlog(Level lv, const char* fmt, ...) {
  if (static_cast<int>(lv) > static_cast<int>(level())) return;
  const char* tag = lv == Level::error ? "error" : (lv == Level::info ? "info" : "debug");
  std::fprintf(stderr, "[lphom %s] ", tag);
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace lphom::log
