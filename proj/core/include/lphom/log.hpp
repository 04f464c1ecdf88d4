#pragma once

#include <cstdio>

namespace lphom::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Current level; initialised from the LPHOM_LOG environment variable
/// (error|info|debug, default error) on first use.
Level level();
void set_level(Level lv);

void vlog(Level lv, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

#define LPHOM_LOG_ERROR(...) ::lphom::log::vlog(::lphom::log::Level::error, __VA_ARGS__)
#define LPHOM_LOG_INFO(...) ::lphom::log::vlog(::lphom::log::Level::info, __VA_ARGS__)
#define LPHOM_LOG_DEBUG(...) ::lphom::log::vlog(::lphom::log::Level::debug, __VA_ARGS__)

}  // namespace lphom::log
